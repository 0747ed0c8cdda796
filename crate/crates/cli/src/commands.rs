use std::path::{Path, PathBuf};

use ewg_restore::bnb::{solve_misocp, BnbOptions, MipSolution, MipStatus};
use ewg_restore::conic::export_program;
use ewg_restore::error::{BnbError, ConicError, FormulationError, OracleError, ScenarioError};
use ewg_restore::formulation::{build_baseline_clr, build_misocp, BaselineVariant, DeviceWeights};
use ewg_restore::network::{BranchStatus, IntegratedSystem};
use ewg_restore::oracle::{enumerate_optimal, evaluate_delivery, verify_plan, FeasibilityReport, Tolerances};
use ewg_restore::plan::RestorationPlan;
use ewg_restore::report::export_report;
use ewg_restore::scenario::{resolve, ScenarioFile};
use log::info;
use serde_json::json;

use crate::{Command, Common};

pub const OK: u8 = 0;
pub const INFEASIBLE: u8 = 1;
pub const INPUT: u8 = 2;
pub const NUMERICAL: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn input(kind: &'static str, message: impl Into<String>) -> Self {
        Failure { code: INPUT, kind, message: message.into() }
    }
}

/// One JSON line on stderr.
pub fn report_error(f: &Failure) {
    eprintln!("{}", json!({ "error": f.kind, "exit_code": f.code, "message": f.message }));
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::input("scenario", e.to_string())
    }
}

impl From<FormulationError> for Failure {
    fn from(e: FormulationError) -> Self {
        Failure::input("formulation", e.to_string())
    }
}

impl From<ConicError> for Failure {
    fn from(e: ConicError) -> Self {
        Failure { code: NUMERICAL, kind: "conic", message: e.to_string() }
    }
}

impl From<BnbError> for Failure {
    fn from(e: BnbError) -> Self {
        match e {
            BnbError::Infeasible => Failure { code: INFEASIBLE, kind: "infeasible", message: e.to_string() },
            BnbError::NumericalFailure => Failure { code: NUMERICAL, kind: "numerical", message: e.to_string() },
            BnbError::Conic(c) => c.into(),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooManyBinaries { .. } => Failure::input("enumeration", e.to_string()),
            OracleError::Formulation(f) => f.into(),
            _ => Failure { code: NUMERICAL, kind: "oracle", message: e.to_string() },
        }
    }
}

fn io(path: &Path, e: std::io::Error) -> Failure {
    Failure::input("io", format!("{}: {e}", path.display()))
}

fn out_dir(c: &Common) -> PathBuf {
    c.out.clone().or_else(|| std::env::var_os("EWG_RESTORE_OUT").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| io(&path, e))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn load(c: &Common) -> Result<ScenarioFile, Failure> {
    let mut s = resolve(&c.scenario)?;
    let p = &mut s.params;
    if let Some(v) = c.lambda {
        p.lambda = v;
    }
    if let Some(v) = c.rel_gap {
        p.rel_gap = v;
    }
    if let Some(v) = c.time_limit {
        p.time_limit_s = v;
    }
    if let Some(v) = c.node_limit {
        p.node_limit = Some(v);
    }
    if let Some(v) = c.deterministic {
        p.deterministic = v;
    }
    if let Some(v) = c.threads {
        p.threads = v;
    }
    p.symmetry_breaking |= c.symmetry_breaking;
    info!("scenario {}: {} electric nodes, {} customers", s.system.name, s.system.electric.nodes.len(), s.system.customers.len());
    Ok(s)
}

fn load_plan(path: &Path, system: &IntegratedSystem) -> Result<RestorationPlan, Failure> {
    let bytes = std::fs::read(path).map_err(|e| io(path, e))?;
    let plan = RestorationPlan::from_json(&bytes).map_err(|e| Failure::input("plan", format!("{}: {e}", path.display())))?;
    let shape_ok = plan.branches.len() == system.electric.branches.len()
        && plan.nodes.len() == system.electric.nodes.len()
        && plan.customers.len() == system.customers.len();
    if !shape_ok {
        return Err(Failure::input("plan", format!("{} does not match the scenario's network", path.display())));
    }
    Ok(plan)
}

fn write_plan_and_tables(
    dir: &Path,
    s: &ScenarioFile,
    plan: &RestorationPlan,
) -> Result<FeasibilityReport, Failure> {
    let report = verify_plan(&s.system, &s.outage, plan, &Tolerances::default(), s.params.pump_flow_unit);
    write(dir, "plan.json", &plan.to_json())?;
    for (name, text) in export_report(&s.system, plan, &report).files() {
        write(dir, name, text)?;
    }
    Ok(report)
}

fn log_summary(s: &ScenarioFile, plan: &RestorationPlan, report: &FeasibilityReport) {
    let m = plan.summary(&s.system);
    info!(
        "objective {:.6}; restored {} of {} electric customers; water {:.2}%; gas {:.2}%",
        plan.objective,
        m.restored_customers,
        m.electric_customers,
        m.water_percent(),
        m.gas_percent()
    );
    info!("customer load {:.2} kW; pump and compressor load {:.2} kW", m.customer_load_kw, m.device_load_kw);
    for d in &plan.devices {
        info!("device {}: {} {:.2} kW of {:.2} kW", d.id, if d.on { "on" } else { "off" }, d.power_kw, d.rated_kw);
    }
    info!("exactness gap {:.3e}; verification {}", report.exactness_gap, if report.pass { "passed" } else { "failed" });
}

fn mip_code(sol: &MipSolution) -> u8 {
    match sol.status {
        MipStatus::Optimal | MipStatus::FeasibleGap => OK,
        MipStatus::Infeasible | MipStatus::TimeLimit => INFEASIBLE,
    }
}

pub fn run(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Restore(c) => restore(&c),
        Command::Baseline { common, variant, weights, w1, w2, default_weight } => {
            baseline(&common, &variant, &weights, [w1, w2], default_weight)
        }
        Command::Verify { common, plan } => verify(&common, &plan),
        Command::Enumerate { common, limit } => enumerate(&common, limit),
        Command::ExportConic(c) => export_conic(&c),
        Command::Report { common, plan } => report(&common, &plan),
        Command::Info(c) => summary(&c),
    }
}

fn restore(c: &Common) -> Result<u8, Failure> {
    let s = load(c)?;
    let form = build_misocp(&s.system, &s.outage, &s.params)?;
    let (sol, plan) = solve_misocp(&form, &s.system, &BnbOptions::from_params(&s.params))?;
    info!("status {:?}; {} nodes; gap {:.2e}; {:.2} s", sol.status, sol.nodes, sol.gap, sol.wall_time);
    let code = mip_code(&sol);
    if code != OK {
        return Err(Failure { code, kind: "no-incumbent", message: format!("search ended with status {:?}", sol.status) });
    }
    let report = write_plan_and_tables(&out_dir(c), &s, &plan)?;
    log_summary(&s, &plan, &report);
    Ok(OK)
}

fn device_ids(s: &ScenarioFile) -> Vec<String> {
    s.system.water.pumps.iter().map(|p| p.id.clone()).chain(s.system.gas.compressors.iter().map(|c| c.id.clone())).collect()
}

fn baseline(c: &Common, variant: &str, pairs: &[String], positional: [Option<f64>; 2], default: f64) -> Result<u8, Failure> {
    let s = load(c)?;
    let variant: BaselineVariant = variant.parse().map_err(|e: String| Failure::input("usage", e))?;
    let ids = device_ids(&s);
    let mut weights: DeviceWeights = ids.iter().map(|id| (id.clone(), default)).collect();
    for (id, w) in ids.iter().zip(positional) {
        if let Some(w) = w {
            weights.insert(id.clone(), w);
        }
    }
    if positional.iter().skip(ids.len()).any(Option::is_some) {
        return Err(Failure::input("usage", format!("scenario has only {} devices", ids.len())));
    }
    for pair in pairs.iter().filter(|p| !p.is_empty()) {
        let (id, w) = pair.split_once('=').ok_or_else(|| Failure::input("usage", format!("weight `{pair}` is not ID=W")))?;
        let w: f64 = w.trim().parse().map_err(|_| Failure::input("usage", format!("weight `{pair}` is not a number")))?;
        if !weights.contains_key(id.trim()) {
            return Err(Failure::input("usage", format!("unknown device `{id}`")));
        }
        weights.insert(id.trim().to_string(), w);
    }
    let form = build_baseline_clr(&s.system, &s.outage, &s.params, &weights, variant)?;
    let (sol, alloc) = solve_misocp(&form, &s.system, &BnbOptions::from_params(&s.params))?;
    info!("baseline status {:?}; objective {:.6}; {} nodes", sol.status, sol.objective, sol.nodes);
    let code = mip_code(&sol);
    if code != OK {
        return Err(Failure { code, kind: "no-incumbent", message: format!("baseline ended with status {:?}", sol.status) });
    }
    for d in &alloc.devices {
        info!("allocated {}: {:.2} kW ({:.2}% of rating)", d.id, d.power_kw, d.percent());
    }
    let dir = out_dir(c);
    write(&dir, "baseline_plan.json", &alloc.to_json())?;
    let out = evaluate_delivery(&s.system, &s.outage, &s.params, &alloc)?;
    let Some(plan) = out.plan else {
        return Err(Failure { code: INFEASIBLE, kind: "delivery", message: "allocation admits no coupled state".into() });
    };
    let report = write_plan_and_tables(&dir, &s, &plan)?;
    log_summary(&s, &plan, &report);
    Ok(OK)
}

fn verify(c: &Common, path: &Path) -> Result<u8, Failure> {
    let s = load(c)?;
    let plan = load_plan(path, &s.system)?;
    let report = verify_plan(&s.system, &s.outage, &plan, &Tolerances::default(), s.params.pump_flow_unit);
    let bundle = export_report(&s.system, &plan, &report);
    write(&out_dir(c), "feasibility.csv", &bundle.feasibility)?;
    for f in report.failures() {
        info!("{}: residual {:.3e} above {:.1e} at {}", f.family, f.max_residual, f.tolerance, f.location);
    }
    if !report.spanning_tree {
        info!("closed switches do not form a spanning tree");
    }
    info!("verification {}", if report.pass { "passed" } else { "failed" });
    Ok(if report.pass { OK } else { INFEASIBLE })
}

fn enumerate(c: &Common, limit: usize) -> Result<u8, Failure> {
    let s = load(c)?;
    let form = build_misocp(&s.system, &s.outage, &s.params)?;
    let e = enumerate_optimal(&s.system, &s.outage, &s.params, limit)?;
    let names: Vec<&str> = e.columns.iter().map(|&i| form.program.names[i].as_str()).collect();
    let ranking: Vec<_> = e
        .ranking
        .iter()
        .map(|a| json!({ "values": a.values, "objective": a.objective }))
        .collect();
    let doc = json!({
        "columns": names,
        "best_objective": e.best_objective,
        "skipped_non_spanning": e.skipped,
        "ranking": ranking,
    });
    let dir = out_dir(c);
    write(&dir, "enumeration.json", &format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")))?;
    info!("{} assignments over {} binaries; {} skipped", e.ranking.len(), e.columns.len(), e.skipped);
    let Some((plan, _)) = e.best_verified else {
        return Err(Failure { code: INFEASIBLE, kind: "infeasible", message: "no assignment is feasible".into() });
    };
    let report = write_plan_and_tables(&dir, &s, &plan)?;
    log_summary(&s, &plan, &report);
    Ok(OK)
}

fn export_conic(c: &Common) -> Result<u8, Failure> {
    let s = load(c)?;
    let form = build_misocp(&s.system, &s.outage, &s.params)?;
    let p = &form.program;
    info!("{} variables, {} binaries, {} rows, {} cones", p.n_vars(), p.binaries.len(), p.rows.len(), p.cones.len());
    write(&out_dir(c), "program.txt", &export_program(p))?;
    Ok(OK)
}

fn report(c: &Common, path: &Path) -> Result<u8, Failure> {
    let s = load(c)?;
    let plan = load_plan(path, &s.system)?;
    let report = verify_plan(&s.system, &s.outage, &plan, &Tolerances::default(), s.params.pump_flow_unit);
    let dir = out_dir(c);
    for (name, text) in export_report(&s.system, &plan, &report).files() {
        write(&dir, name, text)?;
    }
    log_summary(&s, &plan, &report);
    Ok(OK)
}

fn summary(c: &Common) -> Result<u8, Failure> {
    let s = load(c)?;
    let sys = &s.system;
    let count = |st: BranchStatus| sys.electric.branches.iter().filter(|b| b.status == st).count();
    let binaries = build_misocp(&s.system, &s.outage, &s.params).map(|f| f.program.free_binaries().len()).ok();
    let doc = json!({
        "name": sys.name,
        "base_kva": sys.base.kva,
        "electric": {
            "nodes": sys.electric.nodes.len(),
            "branches": sys.electric.branches.len(),
            "switchable": count(BranchStatus::Switchable),
            "damaged": count(BranchStatus::Damaged),
            "generators": sys.electric.dgs.len(),
        },
        "water": { "nodes": sys.water.nodes.len(), "branches": sys.water.branches.len(), "pumps": sys.water.pumps.len() },
        "gas": { "nodes": sys.gas.nodes.len(), "branches": sys.gas.branches.len(), "compressors": sys.gas.compressors.len() },
        "customers": sys.customers.len(),
        "free_binaries": binaries,
        "root_node": s.outage.root_node,
        "params": s.params,
        "notes": s.notes,
    });
    write(&out_dir(c), "info.json", &format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")))?;
    info!(
        "{}: {} electric, {} water, {} gas nodes; {} customers; {} free binaries",
        sys.name,
        sys.electric.nodes.len(),
        sys.water.nodes.len(),
        sys.gas.nodes.len(),
        sys.customers.len(),
        binaries.map_or("n/a".to_string(), |b| b.to_string())
    );
    Ok(OK)
}
