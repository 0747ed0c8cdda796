//! Acceptance suite. Prints one line per criterion on stdout, then fails if
//! any criterion that is not waived failed.

use std::io::Write;
use std::time::Instant;

use ewg_restore::bnb::{solve_misocp, BnbOptions, MipStatus};
use ewg_restore::formulation::{build_baseline_clr, build_misocp, BaselineVariant, DeviceWeights, Symbol};
use ewg_restore::network::{build_topology, BranchStatus, RatioWeights};
use ewg_restore::oracle::*;
use ewg_restore::plan::{DeviceKind, RestorationPlan};
use ewg_restore::scenario::{bundled, ScenarioFile};
use ewg_restore::synth::{random_instance, SynthConfig};

#[derive(PartialEq)]
enum Verdict {
    Pass,
    Fail,
    Waived,
}

struct Line {
    n: u8,
    verdict: Verdict,
    detail: String,
}

fn emit(line: &Line) {
    let tag = match line.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Waived => "WAIVED",
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {}: {tag}  {}", line.n, line.detail);
    let _ = out.flush();
}

fn note(msg: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "    {msg}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn tight() -> BnbOptions {
    BnbOptions { rel_gap: 1e-8, ..BnbOptions::default() }
}

/// A solved plan kept for the physics cross-check.
struct Solved {
    label: String,
    scenario: ScenarioFile,
    plan: RestorationPlan,
}

fn solve(s: &ScenarioFile, opts: &BnbOptions) -> (ewg_restore::bnb::MipSolution, RestorationPlan) {
    let form = build_misocp(&s.system, &s.outage, &s.params).expect("formulation");
    solve_misocp(&form, &s.system, opts).expect("branch and bound")
}

fn criterion1(keep: &mut Vec<Solved>, times: &mut Vec<f64>) -> Line {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for seed in 0..20u64 {
        let s = random_instance(seed, &SynthConfig::small());
        let t0 = Instant::now();
        let (sol, plan) = solve(&s, &tight());
        times.push(t0.elapsed().as_secs_f64());
        let e = enumerate_optimal(&s.system, &s.outage, &s.params, 12).expect("enumeration");
        match e.best_objective {
            Some(best) if sol.status == MipStatus::Optimal => {
                let d = rel(sol.objective, best);
                worst = worst.max(d);
                if d > 1e-6 {
                    bad.push(format!("seed {seed}: {} vs {best}", sol.objective));
                }
            }
            _ => bad.push(format!("seed {seed}: status {:?}, enumeration {:?}", sol.status, e.best_objective)),
        }
        keep.push(Solved { label: format!("small seed {seed}"), scenario: s, plan });
    }
    let secs = start.elapsed().as_secs_f64();
    for b in &bad {
        note(b);
    }
    Line {
        n: 1,
        verdict: if bad.is_empty() { Verdict::Pass } else { Verdict::Fail },
        detail: format!("20 small instances, worst relative difference {worst:.2e}, {secs:.1} s total"),
    }
}

fn criterion2(keep: &mut Vec<Solved>) -> Line {
    let start = Instant::now();
    let mut used = 0;
    let mut seed = 0u64;
    let mut worst_r = 0.0f64;
    let mut worst_raw = 0.0f64;
    let mut worst_cone = 0.0f64;
    let mut bad = Vec::new();
    while used < 20 && seed < 60 {
        let s = random_instance(seed, &SynthConfig::medium());
        seed += 1;
        let form = build_misocp(&s.system, &s.outage, &s.params).expect("formulation");
        let (sol, plan) = solve_misocp(&form, &s.system, &BnbOptions::default()).expect("branch and bound");
        let rep = verify_plan(&s.system, &s.outage, &plan, &Tolerances::default(), s.params.pump_flow_unit);
        if !rep.conditions.all() {
            note(&format!("medium seed {}: conditions {:?}, skipped", seed - 1, rep.conditions));
            continue;
        }
        used += 1;
        let raw = RestorationPlan::decode(&s.system, &form, &sol.raw_x, sol.objective);
        worst_raw = worst_raw.max(exactness_gap(&s.system, &raw, s.params.pump_flow_unit));
        worst_r = worst_r.max(rep.exactness_gap);
        let cone = ["power-flow", "darcy", "weymouth"]
            .iter()
            .map(|f| rep.family(f).map_or(0.0, |x| x.max_residual))
            .fold(0.0, f64::max);
        worst_cone = worst_cone.max(cone);
        if rep.exactness_gap >= 1e-4 || cone > 1e-5 || !rep.pass {
            bad.push(format!(
                "medium seed {}: R {:.2e}, cone residual {cone:.2e}, failures {:?}",
                seed - 1,
                rep.exactness_gap,
                rep.failures().iter().map(|f| &f.family).collect::<Vec<_>>()
            ));
        }
        keep.push(Solved { label: format!("medium seed {}", seed - 1), scenario: s, plan });
    }
    for b in &bad {
        note(b);
    }
    note(&format!("largest R before the polish re-solve: {worst_raw:.2e}"));
    let ok = used == 20 && bad.is_empty();
    Line {
        n: 2,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        detail: format!(
            "{used} scenarios meeting conditions 1-3, max R {worst_r:.2e}, max cone residual {worst_cone:.2e}, {:.1} s",
            start.elapsed().as_secs_f64()
        ),
    }
}

fn toy_allocation(s: &ScenarioFile, p1: f64, p2: f64) -> RestorationPlan {
    let mut plan = RestorationPlan::zero(&s.system);
    for b in &mut plan.branches {
        b.closed = true;
    }
    for (d, p) in plan.devices.iter_mut().zip([p1, p2]) {
        d.on = p > 0.0;
        d.power_kw = p;
    }
    plan
}

fn baseline(s: &ScenarioFile, weights: &[(&str, f64)], variant: BaselineVariant) -> (RestorationPlan, DeliveryOutcome) {
    let w: DeviceWeights = weights.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let form = build_baseline_clr(&s.system, &s.outage, &s.params, &w, variant).expect("baseline");
    let (_, plan) = solve_misocp(&form, &s.system, &tight()).expect("baseline solve");
    let out = evaluate_delivery(&s.system, &s.outage, &s.params, &plan).expect("delivery");
    (plan, out)
}

fn criterion3(keep: &mut Vec<Solved>) -> Line {
    let start = Instant::now();
    let s = bundled("toy-two-pump").expect("toy dataset");
    let (sol, plan) = solve(&s, &tight());
    let e = enumerate_optimal(&s.system, &s.outage, &s.params, 12).expect("enumeration");
    let best = e.best_objective.unwrap_or(f64::NAN);
    let mut bad = Vec::new();
    if rel(sol.objective, best) > 1e-6 {
        bad.push(format!("branch and bound {} vs enumeration {best}", sol.objective));
    }
    let mut allocs = Vec::new();
    for (p1, p2) in [(400.0, 0.0), (0.0, 400.0), (200.0, 200.0)] {
        let out = evaluate_delivery(&s.system, &s.outage, &s.params, &toy_allocation(&s, p1, p2)).expect("delivery");
        allocs.push(format!("{p1}/{p2}: {:.4}", out.objective));
        if out.objective >= sol.objective - 1e-6 {
            bad.push(format!("allocation {p1}/{p2} reaches {} against optimum {}", out.objective, sol.objective));
        }
    }

    let (upstream, out_a) = baseline(&s, &[("P1", 2.0), ("P2", 1.0)], BaselineVariant::Power);
    let da = out_a.plan.as_ref().expect("delivery plan");
    let first_only = da.customers[0].water > 1e-6 && da.customers[1].water.abs() < 1e-6;
    if !(rel(upstream.devices[0].power_kw, 400.0) < 1e-4 && upstream.devices[1].power_kw < 1e-4 && first_only) {
        bad.push(format!(
            "weights 2:1 gave P1 {:.3}, P2 {:.3}, water {:?}",
            upstream.devices[0].power_kw,
            upstream.devices[1].power_kw,
            da.customers.iter().map(|c| c.water).collect::<Vec<_>>()
        ));
    }
    let (downstream, out_b) = baseline(&s, &[("P1", 1.0), ("P2", 2.0)], BaselineVariant::Power);
    let db = out_b.plan.as_ref().expect("delivery plan");
    if !(rel(downstream.devices[1].power_kw, 400.0) < 1e-4 && db.customers.iter().all(|c| c.water.abs() < 1e-6)) {
        bad.push(format!(
            "weights 1:2 gave P1 {:.3}, P2 {:.3}, water {:?}",
            downstream.devices[0].power_kw,
            downstream.devices[1].power_kw,
            db.customers.iter().map(|c| c.water).collect::<Vec<_>>()
        ));
    }
    keep.push(Solved { label: "toy".into(), scenario: s, plan });
    for b in &bad {
        note(b);
    }
    Line {
        n: 3,
        verdict: if bad.is_empty() { Verdict::Pass } else { Verdict::Fail },
        detail: format!(
            "optimum {:.4} (enumeration {best:.4}); allocations {}; baseline 2:1 serves upstream only, 1:2 delivers nothing; {:.1} s",
            sol.objective,
            allocs.join(", "),
            start.elapsed().as_secs_f64()
        ),
    }
}

fn criterion4(keep: &mut Vec<Solved>, case1_time: &mut f64) -> Line {
    let start = Instant::now();
    let s = bundled("case1").expect("case1 dataset");
    let form = build_misocp(&s.system, &s.outage, &s.params).expect("formulation");
    let t0 = Instant::now();
    let (sol, plan) = solve_misocp(&form, &s.system, &BnbOptions::default()).expect("branch and bound");
    *case1_time = t0.elapsed().as_secs_f64();
    let rep = verify_plan(&s.system, &s.outage, &plan, &Tolerances::default(), s.params.pump_flow_unit);
    let mut bad = Vec::new();
    if !rep.pass {
        bad.push(format!("verification failures {:?}", rep.failures().iter().map(|f| &f.family).collect::<Vec<_>>()));
    }
    let cone =
        ["power-flow", "darcy", "weymouth"].iter().map(|f| rep.family(f).map_or(0.0, |x| x.max_residual)).fold(0.0, f64::max);
    if cone > 1e-5 || (rep.conditions.all() && rep.exactness_gap >= 1e-4) {
        bad.push(format!("R {:.2e}, cone residual {cone:.2e}", rep.exactness_gap));
    }

    // Restricted oracle: switches and high-priority pickups fixed at the
    // incumbent, devices and low-priority customers enumerated.
    let low: Vec<_> = s.system.customers.iter().filter(|c| c.priority < 1.0).map(|c| c.id).collect();
    let mut fixed = Vec::new();
    for &col in &form.program.free_binaries() {
        let enumerate = match form.varmap.symbol(col) {
            Some(Symbol::DeviceOn(_)) => true,
            Some(Symbol::Restore(id)) => low.contains(&id),
            _ => false,
        };
        if !enumerate {
            fixed.push((col, sol.x[col].round()));
        }
    }
    let e = enumerate_program(&form, &s.system, &s.outage, &s.params, &fixed, 12).expect("restricted enumeration");
    let restricted = e.best_objective.unwrap_or(f64::NAN);
    if sol.objective < restricted - 1e-4 * restricted.abs() {
        bad.push(format!("restricted enumeration {restricted} beats branch and bound {}", sol.objective));
    }

    let mut clr = Vec::new();
    for (name, w) in [("setting 1", 10000.0), ("setting 2", 100.0)] {
        let weights: Vec<(&str, f64)> = plan.devices.iter().map(|d| (d.id.as_str(), w)).collect();
        let (_, out) = baseline(&s, &weights, BaselineVariant::Percent);
        let sm = out.plan.as_ref().map(|p| p.summary(&s.system));
        clr.push(format!(
            "{name} {:.2} ({:.2}% water, {:.2}% gas)",
            out.objective,
            sm.as_ref().map_or(0.0, |m| m.water_percent()),
            sm.as_ref().map_or(0.0, |m| m.gas_percent())
        ));
        if out.objective >= sol.objective {
            bad.push(format!("baseline {name} reaches {} against {}", out.objective, sol.objective));
        }
    }

    let sm = plan.summary(&s.system);
    let device_kw: f64 = plan.devices.iter().filter(|d| d.on).map(|d| d.power_kw).sum();
    let switches: Vec<String> = s
        .system
        .electric
        .branches
        .iter()
        .zip(&plan.branches)
        .filter(|(b, _)| b.status == BranchStatus::Switchable)
        .map(|(b, st)| format!("{} {}", b.id, if st.closed { "closed" } else { "open" }))
        .collect();
    note("case1 uses synthesized pipe, gas and placement data; published figures are not expected to match");
    note(&format!("restored electric customers: {} (published 11)", sm.restored_customers));
    note(&format!("water served: {:.2}% (published 47.23%)", sm.water_percent()));
    note(&format!("gas served: {:.2}% (published 45.65%)", sm.gas_percent()));
    note(&format!("pump and compressor load: {device_kw:.2} kW (published 637.71 kW)"));
    note(&format!("customer load: {:.2} kW (published 995 kW)", sm.customer_load_kw));
    note(&format!("switches: {}", switches.join(", ")));
    for b in &bad {
        note(b);
    }
    let replacement = if bad.is_empty() { "replacement checks pass" } else { "replacement checks FAIL" };
    keep.push(Solved { label: "case1".into(), scenario: s, plan });
    Line {
        n: 4,
        verdict: if bad.is_empty() { Verdict::Waived } else { Verdict::Fail },
        detail: format!(
            "published case data cannot be reconstructed; {replacement}: objective {:.4}, restricted enumeration {restricted:.4} over {} binaries, R {:.2e}, baselines {}; {:.1} s",
            sol.objective,
            e.columns.len(),
            rep.exactness_gap,
            clr.join(", "),
            start.elapsed().as_secs_f64()
        ),
    }
}

fn shares(s: &ScenarioFile, w: RatioWeights) -> (f64, f64, f64) {
    let mut s = s.clone();
    for c in &mut s.system.customers {
        c.weights = w;
    }
    let (_, plan) = solve(&s, &BnbOptions::default());
    let customers = plan.summary(&s.system).customer_load_kw;
    let kind = |k: DeviceKind| plan.devices.iter().filter(|d| d.on && d.kind == k).map(|d| d.power_kw).sum::<f64>();
    let (pumps, comps) = (kind(DeviceKind::Pump), kind(DeviceKind::Compressor));
    let total = customers + pumps + comps;
    (customers / total, pumps / total, comps / total)
}

fn criterion5() -> Line {
    let start = Instant::now();
    let s = bundled("case1").expect("case1 dataset");
    let base = shares(&s, RatioWeights { a: 0.4, b: 0.3, c: 0.3 });
    let high_a = shares(&s, RatioWeights { a: 0.8, b: 0.1, c: 0.1 });
    let high_b = shares(&s, RatioWeights { a: 0.1, b: 0.8, c: 0.1 });
    let high_c = shares(&s, RatioWeights { a: 0.1, b: 0.1, c: 0.8 });
    let ok = high_a.0 > base.0 && high_b.1 > high_a.1 && high_c.2 > high_a.2;
    let pct = |x: (f64, f64, f64)| format!("{:.2}/{:.2}/{:.2}%", 100.0 * x.0, 100.0 * x.1, 100.0 * x.2);
    Line {
        n: 5,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        detail: format!(
            "customer/pump/compressor shares: base {}, a=0.8 {}, b=0.8 {}, c=0.8 {}; {:.1} s",
            pct(base),
            pct(high_a),
            pct(high_b),
            pct(high_c),
            start.elapsed().as_secs_f64()
        ),
    }
}

/// Largest voltage, water and gas mismatches between a plan and the
/// independent oracles, plus the number of voltage-bound violations.
fn cross_check(s: &ScenarioFile, plan: &RestorationPlan) -> Result<(f64, f64, f64, usize), String> {
    let (island, inj) = island_from_plan(&s.system, s.outage.root_node, plan);
    let sweep = sweep_power_flow(&island, &inj).map_err(|e| e.to_string())?;
    let mut dv = 0.0f64;
    let mut bounds = 0;
    for n in plan.nodes.iter().filter(|n| n.energized) {
        let v = sweep.v.get(&n.id).copied().ok_or("node missing from sweep")?;
        dv = dv.max((v.sqrt() - n.v.sqrt()).abs());
        let node = s.system.electric_node(n.id).ok_or("unknown node")?;
        if n.v < node.v_min_sq * (1.0 - 1e-6) || n.v > node.v_max_sq * (1.0 + 1e-6) {
            bounds += 1;
        }
    }

    let topo = build_topology(&s.system, &s.outage).map_err(|e| e.to_string())?;
    let (served, on) = water_inputs(plan);
    let w = radial_water_solve(&s.system, &topo.water, &served, &on, s.params.pump_flow_unit);
    let mut dw = 0.0f64;
    for (k, st) in plan.water_branches.iter().enumerate() {
        dw = dw.max(rel(st.flow, w.flows[k]));
    }
    for (k, st) in plan.water_nodes.iter().enumerate() {
        if let Some(h) = w.potentials[k] {
            dw = dw.max(rel(st.value, h));
        }
    }
    let (gserved, comps, sources) = gas_inputs(&s.system, plan);
    let g = radial_gas_solve(&s.system, &topo.gas, &gserved, &comps, &sources);
    let mut dg = 0.0f64;
    for (k, st) in plan.gas_branches.iter().enumerate() {
        dg = dg.max(rel(st.flow, g.flows[k]));
    }
    for (k, st) in plan.gas_nodes.iter().enumerate() {
        if let Some(p) = g.potentials[k] {
            dg = dg.max(rel(st.value, p));
        }
    }
    Ok((dv, dw, dg, bounds))
}

fn criterion6(solved: &[Solved]) -> Line {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut bad = Vec::new();
    for item in solved {
        match cross_check(&item.scenario, &item.plan) {
            Ok((dv, dw, dg, bounds)) => {
                worst = (worst.0.max(dv), worst.1.max(dw), worst.2.max(dg));
                if dv > 1e-4 || dw > 1e-5 || dg > 1e-5 || bounds > 0 {
                    bad.push(format!(
                        "{}: voltage {dv:.2e} pu, water {dw:.2e}, gas {dg:.2e}, {bounds} voltage bound violations",
                        item.label
                    ));
                }
            }
            Err(e) => bad.push(format!("{}: {e}", item.label)),
        }
    }
    for b in &bad {
        note(b);
    }
    Line {
        n: 6,
        verdict: if bad.is_empty() { Verdict::Pass } else { Verdict::Fail },
        detail: format!(
            "{} plans; max voltage mismatch {:.2e} pu, water {:.2e}, gas {:.2e} relative; voltage bounds hold",
            solved.len(),
            worst.0,
            worst.1,
            worst.2
        ),
    }
}

fn criterion7(times: &[f64], case1_time: f64) -> Line {
    let slowest = times.iter().copied().fold(0.0, f64::max);
    let s = bundled("case1").expect("case1 dataset");
    let (a, pa) = solve(&s, &BnbOptions::default());
    let (b, pb) = solve(&s, &BnbOptions::default());
    let same = a.objective.to_bits() == b.objective.to_bits() && a.nodes == b.nodes && pa.to_json() == pb.to_json();
    let ok = slowest < 60.0 && case1_time < 600.0 && same;
    Line {
        n: 7,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        detail: format!(
            "slowest small instance {slowest:.2} s, case1 {case1_time:.2} s, repeated deterministic runs {}",
            if same { "identical" } else { "differ" }
        ),
    }
}

#[test]
fn acceptance() {
    let mut solved = Vec::new();
    let mut times = Vec::new();
    let mut case1_time = f64::INFINITY;
    let mut lines = Vec::new();
    let mut run = |line: Line| {
        emit(&line);
        lines.push(line);
    };
    run(criterion1(&mut solved, &mut times));
    run(criterion2(&mut solved));
    run(criterion3(&mut solved));
    run(criterion4(&mut solved, &mut case1_time));
    run(criterion5());
    run(criterion6(&solved));
    run(criterion7(&times, case1_time));
    let failed: Vec<u8> = lines.iter().filter(|l| l.verdict == Verdict::Fail).map(|l| l.n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
