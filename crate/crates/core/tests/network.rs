use std::collections::BTreeSet;

use ewg_restore::network::*;
use ewg_restore::scenario::bundled;
use ewg_restore::synth::{random_instance, SynthConfig};
use proptest::prelude::*;

#[test]
fn weights_must_sum_to_one() {
    let mut s = bundled("case1").unwrap();
    s.system.customers[0].weights = RatioWeights { a: 0.5, b: 0.3, c: 0.3 };
    let rep = validate_system(&s.system);
    assert!(rep.has(ViolationKind::RatioWeights), "{:?}", rep.violations);
}

#[test]
fn water_cycle_is_reported() {
    let mut s = bundled("case1").unwrap();
    let mut extra = s.system.water.branches.last().unwrap().clone();
    let last = s.system.water.nodes.last().unwrap().id;
    extra.id = "loop".into();
    extra.from = last;
    extra.to = s.system.water.nodes[1].id;
    extra.kind = WaterBranchKind::Pipe { f: 1.0 };
    s.system.water.branches.push(extra);
    assert!(validate_system(&s.system).has(ViolationKind::NotRadial));
}

#[test]
fn role_mismatch_for_pump_node() {
    let mut s = bundled("toy-two-pump").unwrap();
    s.system.electric.nodes[1].roles.clear();
    assert!(validate_system(&s.system).has(ViolationKind::RoleMismatch));
}

#[test]
fn dangling_pump_branch() {
    let mut s = bundled("toy-two-pump").unwrap();
    s.system.water.pumps[0].water_branch = "nowhere".into();
    assert!(validate_system(&s.system).has(ViolationKind::DanglingReference));
}

#[test]
fn whole_network_without_damage() {
    let mut s = bundled("case1").unwrap();
    s.outage.damaged_electric_branches.clear();
    let topo = build_topology(&s.system, &s.outage).unwrap();
    assert_eq!(topo.electric.component_size(), s.system.electric.nodes.len());
}

#[test]
fn ties_reconnect_faulted_case1() {
    let s = bundled("case1").unwrap();
    assert_eq!(s.outage.damaged_electric_branches, BTreeSet::from(["9-10".to_string(), "5-25".to_string()]));
    let topo = build_topology(&s.system, &s.outage).unwrap();
    assert_eq!(topo.electric.component_size(), 32);
    for id in ["7-20", "8-14", "11-21", "17-32"] {
        let k = s.system.electric.branches.iter().position(|b| b.id == id).unwrap();
        assert!(topo.electric.usable[k], "{id}");
    }
}

#[test]
fn path_downstream() {
    let s = bundled("toy-two-pump").unwrap();
    let topo = build_topology(&s.system, &s.outage).unwrap();
    assert_eq!(topo.water.downstream(1), vec![2, 3]);
    assert_eq!(topo.water.downstream(3), Vec::<NodeId>::new());
    assert_eq!(topo.water.path_from_root(3), vec![0, 1]);
}

#[test]
fn reactive_default_power_factor() {
    let d = LoadDemand { p_kw: 90.0, q_kvar: None };
    let expect = 90.0 * (1.0 - 0.81f64).sqrt() / 0.9;
    assert!((d.reactive_kvar() - expect).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn validation_is_idempotent(seed in 0u64..1000) {
        let s = random_instance(seed, &SynthConfig::small());
        let a = validate_system(&s.system);
        let b = validate_system(&s.system);
        prop_assert!(a.is_empty(), "{:?}", a.violations);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn trees_have_single_parent(seed in 0u64..1000) {
        let s = random_instance(seed, &SynthConfig::small());
        let topo = build_topology(&s.system, &s.outage).unwrap();
        for tree in [&topo.water, &topo.gas] {
            for u in 0..tree.node_ids.len() {
                prop_assert_eq!(tree.parent_branch[u].is_some(), !tree.is_root(u));
            }
        }
    }

    #[test]
    fn damage_never_grows_component(seed in 0u64..1000, mask in 0u32..256) {
        let s = random_instance(seed, &SynthConfig::small());
        let base = build_topology(&s.system, &s.outage).unwrap().electric.component_nodes();
        let mut outage = s.outage.clone();
        for (k, b) in s.system.electric.branches.iter().enumerate() {
            if mask & (1 << (k % 8)) != 0 && k % 3 == 0 {
                outage.damaged_electric_branches.insert(b.id.clone());
            }
        }
        let damaged = build_topology(&s.system, &outage).unwrap().electric.component_nodes();
        prop_assert!(damaged.is_subset(&base));
        prop_assert!(damaged.contains(&outage.root_node));
    }
}
