use ewg_restore::error::ScenarioError;
use ewg_restore::network::{validate_system, Provenance, DEFAULT_V_MAX_SQ, DEFAULT_V_MIN_SQ};
use ewg_restore::scenario::{bundled, load_scenario, save_scenario, resolve, FlowUnit, BUNDLED};
use ewg_restore::synth::{random_instance, SynthConfig};
use proptest::prelude::*;

#[test]
fn bundled_datasets_validate() {
    for name in BUNDLED {
        let s = bundled(name).unwrap();
        let rep = validate_system(&s.system);
        assert!(rep.is_empty(), "{name}: {:?}", rep.violations);
    }
}

#[test]
fn case1_pump_and_gas_demand() {
    let s = bundled("case1").unwrap();
    let wp1 = s.system.water.pumps.iter().find(|p| p.id == "WP1").unwrap();
    assert_eq!((wp1.alpha, wp1.beta, wp1.efficiency, wp1.rated_power_kw), (185.0, 223.32, 0.8075, 350.0));
    assert_eq!(wp1.electric_node, 7);
    let br = s.system.water.branches.iter().find(|b| b.id == wp1.water_branch).unwrap();
    assert_eq!((br.from, br.to), (1, 2));
    assert_eq!(s.system.gas_node(19).unwrap().demand_rate, 180.2);
    assert_eq!(s.system.customers.len(), 14);
}

#[test]
fn toy_pumps_and_demands() {
    let s = bundled("toy-two-pump.json").unwrap();
    assert!(s.system.water.pumps.iter().all(|p| p.rated_power_kw == 400.0));
    let w: Vec<f64> = s.system.customers.iter().map(|c| c.w_rate).collect();
    assert_eq!(w, vec![250.0, 280.0]);
}

#[test]
fn case2_gas_nodes_survive_round_trip() {
    let s = bundled("case2").unwrap();
    let tabulated = s.system.gas.nodes.iter().filter(|n| n.provenance == Some(Provenance::Published)).count();
    assert_eq!(tabulated, 40);
    let back = load_scenario(save_scenario(&s).as_bytes()).unwrap();
    let a: Vec<f64> = s.system.gas.nodes.iter().map(|n| n.demand_rate).collect();
    let b: Vec<f64> = back.system.gas.nodes.iter().map(|n| n.demand_rate).collect();
    assert_eq!(a, b);
}

#[test]
fn bundled_round_trip() {
    for name in BUNDLED {
        let s = bundled(name).unwrap();
        let text = save_scenario(&s);
        let back = load_scenario(text.as_bytes()).unwrap();
        assert_eq!(back, s, "{name}");
        assert_eq!(save_scenario(&back), text);
    }
}

#[test]
fn empty_customers_round_trip() {
    let mut s = bundled("toy-two-pump").unwrap();
    s.system.customers.clear();
    let back = load_scenario(save_scenario(&s).as_bytes()).unwrap();
    assert!(back.system.customers.is_empty());
}

#[test]
fn defaults_applied() {
    let text = r#"{
        "name": "tiny",
        "electric": {"nodes": [{"id": 1, "roles": ["dg"]}], "branches": [],
                     "dgs": [{"node": 1, "capacity_kva": 100}]},
        "outage": {"root_node": 1}
    }"#;
    let s = load_scenario(text.as_bytes()).unwrap();
    assert_eq!(s.params.lambda, 0.001);
    assert_eq!(s.params.fictitious_demand, 1.0);
    assert_eq!(s.params.pump_flow_unit, FlowUnit::CubicMetresPerSecond);
    let n = &s.system.electric.nodes[0];
    assert_eq!((n.v_min_sq, n.v_max_sq), (DEFAULT_V_MIN_SQ, DEFAULT_V_MAX_SQ));
}

#[test]
fn parse_error_has_location() {
    let text = "{\n  \"name\": \"x\",\n  \"electric\": 5\n}";
    match load_scenario(text.as_bytes()) {
        Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn unknown_field_rejected() {
    let mut v: serde_json::Value = serde_json::from_str(&save_scenario(&bundled("toy-two-pump").unwrap())).unwrap();
    v["params"]["lamda"] = serde_json::json!(0.1);
    assert!(matches!(load_scenario(v.to_string().as_bytes()), Err(ScenarioError::Parse { .. })));
}

#[test]
fn dangling_damage_reference() {
    let mut s = bundled("toy-two-pump").unwrap();
    s.outage.damaged_electric_branches.insert("9-99".into());
    match load_scenario(save_scenario(&s).as_bytes()) {
        Err(ScenarioError::Reference { location, .. }) => assert!(location.contains("damaged")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn dangling_customer_node() {
    let mut s = bundled("toy-two-pump").unwrap();
    s.system.customers[0].water_node = Some(42);
    assert!(matches!(load_scenario(save_scenario(&s).as_bytes()), Err(ScenarioError::Reference { .. })));
}

#[test]
fn resolve_file_then_bundled() {
    let dir = std::env::temp_dir().join(format!("ewg-scenario-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mine.json");
    let mut s = bundled("toy-two-pump").unwrap();
    s.system.name = "mine".into();
    std::fs::write(&path, save_scenario(&s)).unwrap();
    assert_eq!(resolve(path.to_str().unwrap()).unwrap().system.name, "mine");
    assert_eq!(resolve("case1").unwrap().system.name, "case1");
    assert!(resolve("no-such-case").is_err());
    std::fs::remove_dir_all(dir).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_round_trip(seed in 0u64..10_000) {
        let s = random_instance(seed, &SynthConfig::medium());
        let back = load_scenario(save_scenario(&s).as_bytes()).unwrap();
        prop_assert_eq!(back, s);
    }
}
