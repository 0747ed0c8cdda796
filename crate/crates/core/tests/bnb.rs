use ewg_restore::bnb::*;
use ewg_restore::conic::{solve_socp, RowKind, SolveSettings};
use ewg_restore::error::BnbError;
use ewg_restore::formulation::*;
use ewg_restore::oracle::enumerate_optimal;
use ewg_restore::scenario::{bundled, ScenarioFile};
use ewg_restore::synth::{random_instance, SynthConfig};
use proptest::prelude::*;

fn build(s: &ScenarioFile) -> Formulation {
    build_misocp(&s.system, &s.outage, &s.params).unwrap()
}

fn tight() -> BnbOptions {
    BnbOptions { rel_gap: 1e-8, ..BnbOptions::default() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn toy_matches_enumeration() {
    let s = bundled("toy-two-pump").unwrap();
    let (sol, plan) = solve_misocp(&build(&s), &s.system, &tight()).unwrap();
    let e = enumerate_optimal(&s.system, &s.outage, &s.params, 14).unwrap();
    assert_eq!(sol.status, MipStatus::Optimal);
    assert!(rel(sol.objective, e.best_objective.unwrap()) < 1e-6);
    assert_eq!(plan.objective, sol.objective);
}

#[test]
fn fully_fixed_program_needs_no_branching() {
    let s = bundled("toy-two-pump").unwrap();
    let mut f = build(&s);
    let e = enumerate_optimal(&s.system, &s.outage, &s.params, 14).unwrap();
    let best = &e.ranking[0];
    for (&col, &v) in e.columns.iter().zip(&best.values) {
        f.program.lower[col] = f64::from(v);
        f.program.upper[col] = f64::from(v);
    }
    let direct = solve_socp(&f.program, &[], &SolveSettings::default()).unwrap();
    let (sol, _) = solve_misocp(&f, &s.system, &tight()).unwrap();
    assert_eq!(sol.nodes, 1);
    assert!(rel(sol.objective, direct.objective) < 1e-9);
}

#[test]
fn integral_relaxation_is_kept() {
    let s = bundled("toy-two-pump").unwrap();
    let mut f = build(&s);
    for b in f.program.binaries.clone() {
        f.program.lower[b] = 1.0;
    }
    let relaxed = solve_socp(&f.program, &[], &SolveSettings::default()).unwrap();
    let (x, obj) = rounding_repair(&f, &s.system, &relaxed.x, &SolveSettings::default()).unwrap().unwrap();
    assert_eq!(x, relaxed.x);
    assert_eq!(obj, relaxed.objective);
}

#[test]
fn fractional_device_rounds_down() {
    let s = bundled("toy-two-pump").unwrap();
    let f = build(&s);
    let mut x = solve_socp(&f.program, &[], &SolveSettings::default()).unwrap().x;
    let chi = f.varmap.get(Symbol::DeviceOn(DeviceRef::Pump(0))).unwrap();
    x[chi] = 0.49;
    let (fixed, _) = rounding_repair(&f, &s.system, &x, &SolveSettings::default()).unwrap().unwrap();
    assert_eq!(fixed[chi], 0.0);
    assert!(f.varmap.value(&fixed, Symbol::WaterFlow(0)).abs() < 1e-6);
}

#[test]
fn case1_root_repair_is_a_lower_bound() {
    let s = bundled("case1").unwrap();
    let f = build(&s);
    let root = solve_socp(&f.program, &[], &SolveSettings::default()).unwrap();
    let (_, repaired) = rounding_repair(&f, &s.system, &root.x, &SolveSettings::default()).unwrap().expect("incumbent");
    let (sol, _) = solve_misocp(&f, &s.system, &BnbOptions::default()).unwrap();
    assert!(repaired <= sol.objective * (1.0 + 1e-7));
    assert!(sol.bound >= sol.objective - 1e-9);
}

#[test]
fn infeasible_root_reported() {
    let s = bundled("toy-two-pump").unwrap();
    let mut f = build(&s);
    let v = f.varmap.get(Symbol::Voltage(1)).unwrap();
    f.program.add_row(vec![(v, 1.0)], RowKind::Le, 0.5, "");
    assert_eq!(solve_misocp(&f, &s.system, &BnbOptions::default()).unwrap_err(), BnbError::Infeasible);
}

#[test]
fn node_limit_returns_incumbent() {
    let s = bundled("case1").unwrap();
    let opts = BnbOptions { node_limit: Some(3), ..BnbOptions::default() };
    let (sol, _) = solve_misocp(&build(&s), &s.system, &opts).unwrap();
    assert!(matches!(sol.status, MipStatus::FeasibleGap | MipStatus::Optimal | MipStatus::TimeLimit));
    assert!(sol.nodes <= 3);
    if sol.status == MipStatus::FeasibleGap {
        assert!(sol.gap >= -1e-9);
    }
}

#[test]
fn deterministic_runs_agree() {
    let s = random_instance(7, &SynthConfig::small());
    let f = build(&s);
    let (a, _) = solve_misocp(&f, &s.system, &BnbOptions::default()).unwrap();
    let (b, _) = solve_misocp(&f, &s.system, &BnbOptions::default()).unwrap();
    assert_eq!(a.x, b.x);
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.incumbents, b.incumbents);
}

#[test]
fn batch_mode_reaches_same_optimum() {
    let s = random_instance(2, &SynthConfig::small());
    let f = build(&s);
    let (serial, _) = solve_misocp(&f, &s.system, &tight()).unwrap();
    let (batch, _) = solve_misocp(&f, &s.system, &BnbOptions { threads: 4, ..tight() }).unwrap();
    assert!(rel(serial.objective, batch.objective) < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn certificate_and_incumbents(seed in 100u64..400) {
        let s = random_instance(seed, &SynthConfig::small());
        let f = build(&s);
        let (sol, _) = solve_misocp(&f, &s.system, &BnbOptions::default()).unwrap();
        let e = enumerate_optimal(&s.system, &s.outage, &s.params, 14).unwrap();
        for a in &e.ranking {
            if let Some(obj) = a.objective {
                prop_assert!(sol.bound >= obj - 1e-6 * obj.abs().max(1.0));
            }
        }
        prop_assert!(sol.incumbents.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(sol.gap >= -1e-9);
        if sol.status == MipStatus::Optimal {
            prop_assert!(sol.gap <= 1e-4);
        }
        let chk = ewg_restore::conic::check_solution(&f.program, &sol.x, 1e-6).unwrap();
        prop_assert!(f.program.binaries.iter().all(|&b| (sol.x[b] - sol.x[b].round()).abs() <= 1e-6));
        prop_assert!(chk.max_violation() <= 1e-6, "{:?}", chk);
    }
}
