use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ewg-restore"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn error_record(o: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&o.stderr);
    let line = stderr.lines().rev().find(|l| l.starts_with('{')).expect("json error line");
    serde_json::from_str(line).expect("valid json")
}

#[test]
fn restore_then_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["restore", "toy-two-pump"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["plan.json", "customers.csv", "voltages.csv", "devices.csv", "summary.csv", "feasibility.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    assert!(o.stdout.is_empty());
    let plan = dir.path().join("plan.json");
    let v = run(&["verify", "toy-two-pump", "--plan", plan.to_str().unwrap()], dir.path());
    assert_eq!(code(&v), 0);
    let csv = std::fs::read_to_string(dir.path().join("feasibility.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(3) == Some("1")), "{csv}");
}

#[test]
fn corrupted_plan_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["restore", "toy-two-pump"], dir.path())), 0);
    let path = dir.path().join("plan.json");
    let mut plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let w = plan["water_branches"][0]["flow"].as_f64().unwrap();
    plan["water_branches"][0]["flow"] = serde_json::json!(w + 50.0);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&plan).unwrap()).unwrap();
    let out = dir.path().join("check");
    let v = run(&["verify", "toy-two-pump", "--plan", bad.to_str().unwrap()], &out);
    assert_eq!(code(&v), 1);
    let csv = std::fs::read_to_string(out.join("feasibility.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("water-balance,") && l.split(',').nth(3) == Some("0")), "{csv}");
}

#[test]
fn missing_plan_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "toy-two-pump", "--plan", "/nonexistent/plan.json"], dir.path());
    assert_eq!(code(&o), 2);
    assert_eq!(error_record(&o)["error"], "io");
}

#[test]
fn unknown_scenario_and_flags_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["restore", "no-such-dataset"], dir.path());
    assert_eq!(code(&o), 2);
    assert_eq!(error_record(&o)["exit_code"], 2);
    assert_eq!(code(&run(&["restore", "toy-two-pump", "--bogus"], dir.path())), 2);
    assert_eq!(code(&run(&["restore", "toy-two-pump", "--rel-gap", "1.5"], dir.path())), 2);
    assert_eq!(code(&run(&["restore", "toy-two-pump", "--lambda", "-1"], dir.path())), 2);
    assert_eq!(code(&run(&["restore", "toy-two-pump", "--threads", "0"], dir.path())), 2);
}

#[test]
fn malformed_scenario_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\n  \"name\": 3\n}\n").unwrap();
    let o = run(&["info", path.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(error_record(&o)["message"].as_str().unwrap().contains("line"));
}

#[test]
fn baseline_upstream_weights_supply_first_pump() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["baseline", "toy-two-pump", "--variant", "power", "--w1", "2", "--w2", "1"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let alloc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("baseline_plan.json")).unwrap()).unwrap();
    let p1 = alloc["devices"][0]["power_kw"].as_f64().unwrap();
    let p2 = alloc["devices"][1]["power_kw"].as_f64().unwrap();
    assert!((p1 - 400.0).abs() < 0.1 && p2.abs() < 1e-3, "{p1} {p2}");
    let customers = std::fs::read_to_string(dir.path().join("customers.csv")).unwrap();
    let rows: Vec<&str> = customers.lines().skip(1).collect();
    assert!(rows[0].split(',').nth(3).unwrap().parse::<f64>().unwrap() > 0.0);
    assert!(rows[1].split(',').nth(3).unwrap().parse::<f64>().unwrap() < 1e-6);
}

#[test]
fn baseline_rejects_unknown_device() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["baseline", "toy-two-pump", "--weights", "P9=1"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn enumerate_export_info_and_report() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["enumerate", "toy-two-pump"], dir.path())), 0);
    let e: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("enumeration.json")).unwrap()).unwrap();
    assert_eq!(e["ranking"].as_array().unwrap().len(), 4);
    assert_eq!(code(&run(&["enumerate", "case1", "--limit", "4"], dir.path())), 2);

    assert_eq!(code(&run(&["export-conic", "toy-two-pump"], dir.path())), 0);
    let text = std::fs::read_to_string(dir.path().join("program.txt")).unwrap();
    let program = ewg_restore::conic::import_program(&text).unwrap();
    assert_eq!(program.binaries.len(), 2);

    assert_eq!(code(&run(&["info", "case1"], dir.path())), 0);
    let info: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("info.json")).unwrap()).unwrap();
    assert_eq!(info["customers"], 14);

    let plan = dir.path().join("plan.json");
    let again = dir.path().join("again");
    assert_eq!(code(&run(&["report", "toy-two-pump", "--plan", plan.to_str().unwrap()], &again)), 0);
    assert_eq!(
        std::fs::read_to_string(again.join("devices.csv")).unwrap(),
        std::fs::read_to_string(dir.path().join("devices.csv")).unwrap()
    );
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ewg-restore"))
        .args(["info", "toy-two-pump"])
        .env("EWG_RESTORE_OUT", dir.path())
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("info.json").is_file());
}

#[test]
fn node_limit_without_incumbent_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["restore", "case1", "--node-limit", "0"], dir.path());
    let c = code(&o);
    assert!(c == 0 || c == 1, "{c}");
    if c == 1 {
        assert_eq!(error_record(&o)["error"], "no-incumbent");
    }
}
