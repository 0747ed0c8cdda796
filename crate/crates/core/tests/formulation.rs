use std::collections::HashMap;

use ewg_restore::conic::{solve_socp, RowKind, SolveSettings, SolveStatus};
use ewg_restore::formulation::*;
use ewg_restore::network::{build_topology, BranchStatus};
use ewg_restore::plan::RestorationPlan;
use ewg_restore::scenario::{bundled, ScenarioFile};
use ewg_restore::synth::{random_instance, SynthConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn build(s: &ScenarioFile) -> Formulation {
    build_misocp(&s.system, &s.outage, &s.params).unwrap()
}

/// Every row carrying `tag` whose columns are all assigned holds at `x`.
fn rows_hold(form: &Formulation, tag: &str, x: &HashMap<usize, f64>) -> Result<usize, String> {
    let mut checked = 0;
    for row in form.program.rows.iter().filter(|r| r.tag.split(',').any(|t| t == tag)) {
        if !row.terms.iter().all(|(i, _)| x.contains_key(i)) {
            continue;
        }
        let act: f64 = row.terms.iter().map(|(i, c)| c * x[i]).sum();
        let ok = match row.kind {
            RowKind::Le => act <= row.rhs + 1e-9 * row.rhs.abs().max(1.0),
            RowKind::Eq => (act - row.rhs).abs() <= 1e-9 * row.rhs.abs().max(1.0),
        };
        if !ok {
            return Err(format!("row {tag}: activity {act} vs rhs {}", row.rhs));
        }
        checked += 1;
    }
    Ok(checked)
}

#[test]
fn case1_binary_count() {
    let s = bundled("case1").unwrap();
    let f = build(&s);
    let topo = build_topology(&s.system, &s.outage).unwrap();
    let switchable = s
        .system
        .electric
        .branches
        .iter()
        .enumerate()
        .filter(|(k, b)| b.status == BranchStatus::Switchable && topo.electric.usable[*k] && !s.outage.is_damaged(b))
        .count();
    assert_eq!(f.program.free_binaries().len(), switchable + 14 + 6);
}

#[test]
fn coverage_complete_on_full_systems() {
    for name in ["case1", "case2"] {
        let s = bundled(name).unwrap();
        assert!(coverage_gaps(&build(&s)).is_empty(), "{name}");
    }
    let toy = bundled("toy-two-pump").unwrap();
    let gaps = coverage_gaps(&build(&toy));
    assert!(gaps.contains(&"41".to_string()));
}

#[test]
fn fictitious_big_m_is_component_minus_one() {
    let mut s = bundled("case1").unwrap();
    s.outage.damaged_electric_branches.clear();
    assert_eq!(build(&s).big_m.fict, 31.0);
}

#[test]
fn pump_flow_big_m_is_flow_cap() {
    let s = bundled("case1").unwrap();
    let f = build(&s);
    for p in &s.system.water.pumps {
        let br = s.system.water.branches.iter().find(|b| b.id == p.water_branch).unwrap();
        assert_eq!(f.big_m.pump_flow[&p.id], br.w_max);
    }
}

#[test]
fn voltage_big_m_without_impedance() {
    let m = voltage_big_m(1.1025, 0.9025, 0.0, 0.0, 17.0);
    assert!((m - 0.2).abs() < 1e-12);
    assert!(voltage_big_m(1.1025, 0.9025, 0.01, 0.02, 4.0) > m);
}

#[test]
fn uniform_big_m_policy() {
    let mut s = bundled("toy-two-pump").unwrap();
    s.params.big_m = ewg_restore::scenario::BigMPolicy::Uniform(1e4);
    let f = build(&s);
    assert!(f.big_m.pump_head.values().all(|&m| m == 1e4));
    assert!(f.big_m.volt.values().all(|&m| m == 1e4));
}

#[test]
fn all_zero_weights_rejected() {
    let mut s = bundled("case1").unwrap();
    s.system.customers[3].weights = ewg_restore::network::RatioWeights { a: 0.0, b: 0.0, c: 0.0 };
    let id = s.system.customers[3].id;
    assert_eq!(build_misocp(&s.system, &s.outage, &s.params).unwrap_err(), ewg_restore::error::FormulationError::BadWeights(id));
}

#[test]
fn invalid_system_rejected() {
    let mut s = bundled("case1").unwrap();
    s.system.customers[0].weights.a = 0.9;
    assert!(matches!(build_misocp(&s.system, &s.outage, &s.params), Err(ewg_restore::error::FormulationError::InvalidSystem(_))));
}

#[test]
fn damaged_fixed_branch_isolating_node() {
    let mut s = bundled("toy-two-pump").unwrap();
    s.outage.damaged_electric_branches.insert("1-2".into());
    // branch 2-3 is closed-fixed but both its ends left the root component
    assert!(matches!(
        build_misocp(&s.system, &s.outage, &s.params),
        Err(ewg_restore::error::FormulationError::InfeasibleStructure(_))
    ));
}

#[test]
fn epigraph_term_examples() {
    let s = bundled("case1").unwrap();
    let mut plan = RestorationPlan::zero(&s.system);
    assert_eq!(evaluate_objective(&plan, &s.system, 0.001), 0.0);
    let c = s.system.customers.iter().find(|c| c.priority == 100.0 && c.weights.a == 0.4).unwrap();
    let st = plan.customers.iter_mut().find(|x| x.id == c.id).unwrap();
    st.restored = true;
    st.water = 0.3 * c.w_rate;
    st.gas = 0.3 * c.g_rate;
    assert!((customer_term(&plan, &s.system) - 100.0).abs() < 1e-9);
}

#[test]
fn equal_ratios_give_priority() {
    let mut s = bundled("case1").unwrap();
    s.system.customers.truncate(1);
    let c = &mut s.system.customers[0];
    c.priority = 10.0;
    c.weights = ewg_restore::network::RatioWeights { a: 0.4, b: 0.3, c: 0.3 };
    let c = c.clone();
    let mut plan = RestorationPlan::zero(&s.system);
    plan.customers[0].water = c.w_rate * 0.3;
    plan.customers[0].gas = c.g_rate * 0.3;
    assert_eq!(evaluate_objective(&plan, &s.system, 0.0), 0.0);
    plan.customers[0].restored = true;
    assert!((evaluate_objective(&plan, &s.system, 0.0) - 10.0).abs() < 1e-9);
}

#[test]
fn unrestored_customer_has_zero_epigraph() {
    let s = bundled("case1").unwrap();
    let f = build(&s);
    let c = &s.system.customers[0];
    let r = f.varmap.get(Symbol::Restore(c.id)).unwrap();
    let sol = solve_socp(&f.program, &[(r, 0.0)], &SolveSettings::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!(f.varmap.value(&sol.x, Symbol::Epigraph(c.id)).abs() < 1e-7);
}

#[test]
fn idle_pump_carries_no_water() {
    let s = bundled("toy-two-pump").unwrap();
    let f = build(&s);
    let chi = f.varmap.get(Symbol::DeviceOn(DeviceRef::Pump(0))).unwrap();
    let sol = solve_socp(&f.program, &[(chi, 0.0)], &SolveSettings::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!(f.varmap.value(&sol.x, Symbol::WaterFlow(0)).abs() < 1e-6);
    assert!(f.varmap.value(&sol.x, Symbol::WaterServed(1)).abs() < 1e-6);
}

#[test]
fn epigraph_matches_direct_evaluation_on_toy() {
    let s = bundled("toy-two-pump").unwrap();
    let f = build(&s);
    let sol = solve_socp(&f.program, &[], &SolveSettings::default()).unwrap();
    let plan = RestorationPlan::decode(&s.system, &f, &sol.x, sol.objective);
    let direct = evaluate_objective(&plan, &s.system, s.params.lambda);
    assert!((sol.objective - direct).abs() <= 1e-6 * direct.abs().max(1.0), "{} vs {direct}", sol.objective);
}

#[test]
fn baseline_weights_checked() {
    let s = bundled("toy-two-pump").unwrap();
    let mut w = DeviceWeights::new();
    w.insert("P1".into(), 1.0);
    assert!(build_baseline_clr(&s.system, &s.outage, &s.params, &w, BaselineVariant::Power).is_err());
    w.insert("P2".into(), -1.0);
    assert!(build_baseline_clr(&s.system, &s.outage, &s.params, &w, BaselineVariant::Power).is_err());
    w.insert("P2".into(), 1.0);
    w.insert("P3".into(), 1.0);
    assert!(build_baseline_clr(&s.system, &s.outage, &s.params, &w, BaselineVariant::Power).is_err());
    assert_eq!("count".parse::<BaselineVariant>(), Ok(BaselineVariant::Count));
    assert!("watts".parse::<BaselineVariant>().is_err());
}

#[test]
fn baseline_has_no_water_or_gas() {
    let s = bundled("case1").unwrap();
    let w: DeviceWeights = s
        .system
        .water
        .pumps
        .iter()
        .map(|p| p.id.clone())
        .chain(s.system.gas.compressors.iter().map(|c| c.id.clone()))
        .map(|id| (id, 1.0))
        .collect();
    let f = build_baseline_clr(&s.system, &s.outage, &s.params, &w, BaselineVariant::Percent).unwrap();
    assert!(f.varmap.symbols().iter().all(|s| !matches!(s, Symbol::WaterFlow(_) | Symbol::GasFlow(_) | Symbol::Head(_))));
    let tags = f.program.tags();
    assert!(tags.contains("35") && !tags.contains("36") && !tags.contains("41"));
}

fn random_fixing(f: &Formulation, rng: &mut ChaCha8Rng) -> Vec<(usize, f64)> {
    f.program.free_binaries().into_iter().map(|b| (b, if rng.gen_bool(0.7) { 1.0 } else { 0.0 })).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn product_rows_pin_y(seed in 0u64..500, chi in 0u8..2, share in 0.0f64..=1.0) {
        let s = random_instance(seed, &SynthConfig::small());
        let f = build(&s);
        for (d, pump) in s.system.water.pumps.iter().enumerate() {
            let dev = DeviceRef::Pump(d);
            let (c, p, y) = (
                f.varmap.get(Symbol::DeviceOn(dev)).unwrap(),
                f.varmap.get(Symbol::DevicePower(dev)).unwrap(),
                f.varmap.get(Symbol::DeviceProduct(dev)).unwrap(),
            );
            let power = share * pump.rated_power_kw;
            let exact = f64::from(chi) * power;
            let at = |yv: f64| HashMap::from([(c, f64::from(chi)), (p, power), (y, yv)]);
            prop_assert!(rows_hold(&f, "product", &at(exact)).unwrap() >= 3);
            let off = 1e-3 * pump.rated_power_kw;
            prop_assert!(rows_hold(&f, "product", &at(exact + off)).is_err());
            prop_assert!(exact < off || rows_hold(&f, "product", &at(exact - off)).is_err());
        }
    }

    #[test]
    fn big_m_rows_admit_idle_states(seed in 0u64..500, sample in 0u64..1000) {
        let s = random_instance(seed, &SynthConfig::small());
        let f = build(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(sample);
        let mut x = HashMap::new();
        for (i, n) in s.system.water.nodes.iter().enumerate() {
            let (lo, hi) = (f.bounds.head_lo[i], f.bounds.head_hi[i]);
            x.insert(f.varmap.get(Symbol::Head(n.id)).unwrap(), if hi > lo { rng.gen_range(lo..=hi) } else { lo });
        }
        for n in &s.system.gas.nodes {
            x.insert(f.varmap.get(Symbol::Pressure(n.id)).unwrap(), rng.gen_range(n.psi_min..=n.psi_max));
        }
        for (b, br) in s.system.water.branches.iter().enumerate() {
            let hi = x[&f.varmap.get(Symbol::Head(br.from)).unwrap()];
            let hj = x[&f.varmap.get(Symbol::Head(br.to)).unwrap()];
            x.insert(f.varmap.get(Symbol::HeadLoss(b)).unwrap(), hi - hj);
            x.insert(f.varmap.get(Symbol::WaterFlow(b)).unwrap(), 0.0);
        }
        for b in 0..s.system.gas.branches.len() {
            x.insert(f.varmap.get(Symbol::GasFlow(b)).unwrap(), 0.0);
        }
        for d in 0..s.system.water.pumps.len() {
            x.insert(f.varmap.get(Symbol::DeviceOn(DeviceRef::Pump(d))).unwrap(), 0.0);
        }
        for d in 0..s.system.gas.compressors.len() {
            x.insert(f.varmap.get(Symbol::DeviceOn(DeviceRef::Compressor(d))).unwrap(), 0.0);
        }
        let (v_lo, v_hi) = (f.bounds.v_min, f.bounds.v_max);
        for n in &s.system.electric.nodes {
            x.insert(f.varmap.get(Symbol::Voltage(n.id)).unwrap(), rng.gen_range(v_lo..=v_hi));
        }
        for (k, _) in s.system.electric.branches.iter().enumerate() {
            if let Some(a) = f.varmap.get(Symbol::Switch(k)) {
                x.insert(a, 0.0);
                for sym in [Symbol::BranchP(k), Symbol::BranchQ(k), Symbol::BranchL(k)] {
                    x.insert(f.varmap.get(sym).unwrap(), 0.0);
                }
            }
        }
        let mut checked = 0;
        for tag in ["8", "9", "38", "39", "40", "42", "43", "44"] {
            checked += rows_hold(&f, tag, &x).map_err(TestCaseError::fail)?;
        }
        prop_assert!(checked > 0);
    }

    #[test]
    fn epigraph_equals_direct_objective(seed in 0u64..500, pick in 0u64..1000) {
        let s = random_instance(seed, &SynthConfig::small());
        let f = build(&s);
        let fixed = random_fixing(&f, &mut ChaCha8Rng::seed_from_u64(pick));
        let sol = solve_socp(&f.program, &fixed, &SolveSettings::default()).unwrap();
        prop_assume!(sol.status == SolveStatus::Optimal);
        let plan = RestorationPlan::decode(&s.system, &f, &sol.x, sol.objective);
        let direct = evaluate_objective(&plan, &s.system, s.params.lambda);
        prop_assert!((sol.objective - direct).abs() <= 1e-6 * direct.abs().max(1.0), "{} vs {}", sol.objective, direct);
    }
}

#[test]
fn scaling_priorities_scales_customer_term() {
    use ewg_restore::bnb::{solve_misocp, BnbOptions};
    for s in [bundled("toy-two-pump").unwrap(), random_instance(3, &SynthConfig::small())] {
        let opts = BnbOptions { rel_gap: 1e-8, ..BnbOptions::default() };
        let (_, base) = solve_misocp(&build(&s), &s.system, &opts).unwrap();
        let mut scaled = s.clone();
        for c in &mut scaled.system.customers {
            c.priority *= 3.0;
        }
        let f2 = build(&scaled);
        assert_eq!(f2.program.n_vars(), build(&s).program.n_vars());
        let (_, plan) = solve_misocp(&f2, &scaled.system, &opts).unwrap();
        let a = customer_term(&base, &s.system);
        let b = customer_term(&plan, &scaled.system);
        assert!((b - 3.0 * a).abs() <= 1e-4 * b.abs().max(1.0), "{b} vs 3·{a}");
    }
}
