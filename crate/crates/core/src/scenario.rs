//! Scenario documents: one JSON file holding the system, the outage and the
//! solver parameters.

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::network::{
    validate_system, Customer, DistributedGenerator, ElectricBranch, ElectricNetwork, ElectricNode, GasBranch,
    GasCompressor, GasNetwork, GasNode, IntegratedSystem, OutageSpec, UnitBase, ViolationKind, WaterBranch,
    WaterNetwork, WaterNode, WaterPump,
};

/// Flow unit assumed inside the pump curve and the Darcy coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FlowUnit {
    #[default]
    #[serde(rename = "m3/s")]
    CubicMetresPerSecond,
    #[serde(rename = "m3/h")]
    CubicMetresPerHour,
}

impl FlowUnit {
    /// Multiplier from m³/h to this unit.
    pub fn from_m3h(self) -> f64 {
        match self {
            FlowUnit::CubicMetresPerSecond => 1.0 / 3600.0,
            FlowUnit::CubicMetresPerHour => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BigMPolicy {
    /// Per-constraint values from variable bounds.
    #[default]
    Derived,
    /// One constant for every switched constraint except radiality.
    Uniform(f64),
}

fn default_lambda() -> f64 {
    0.001
}
fn default_rel_gap() -> f64 {
    1e-4
}
fn default_time_limit() -> f64 {
    1800.0
}
fn default_tol() -> f64 {
    1e-8
}
fn default_demand() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}
fn default_threads() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    /// Weight of the head-loss and pressure-drop penalties.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_rel_gap")]
    pub rel_gap: f64,
    /// Seconds.
    #[serde(default = "default_time_limit")]
    pub time_limit_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_limit: Option<u64>,
    #[serde(default = "default_tol")]
    pub feas_tol: f64,
    #[serde(default = "default_tol")]
    pub gap_tol: f64,
    #[serde(default)]
    pub big_m: BigMPolicy,
    /// Fictitious demand D_i of every non-root node.
    #[serde(default = "default_demand")]
    pub fictitious_demand: f64,
    #[serde(default = "default_true")]
    pub deterministic: bool,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default)]
    pub symmetry_breaking: bool,
    #[serde(default)]
    pub pump_flow_unit: FlowUnit,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            lambda: default_lambda(),
            rel_gap: default_rel_gap(),
            time_limit_s: default_time_limit(),
            node_limit: None,
            feas_tol: default_tol(),
            gap_tol: default_tol(),
            big_m: BigMPolicy::Derived,
            fictitious_demand: default_demand(),
            deterministic: true,
            threads: 1,
            symmetry_breaking: false,
            pump_flow_unit: FlowUnit::CubicMetresPerSecond,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioFile {
    pub system: IntegratedSystem,
    pub outage: OutageSpec,
    pub params: SolverParams,
    pub notes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaterSection {
    nodes: Vec<WaterNode>,
    branches: Vec<WaterBranch>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GasSection {
    nodes: Vec<GasNode>,
    branches: Vec<GasBranch>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElectricSection {
    nodes: Vec<ElectricNode>,
    branches: Vec<ElectricBranch>,
    #[serde(default)]
    dgs: Vec<DistributedGenerator>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingSection {
    #[serde(default)]
    pumps: Vec<WaterPump>,
    #[serde(default)]
    compressors: Vec<GasCompressor>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
    #[serde(default)]
    base: UnitBase,
    electric: ElectricSection,
    #[serde(default = "empty_water")]
    water: WaterSection,
    #[serde(default = "empty_gas")]
    gas: GasSection,
    #[serde(default)]
    coupling: CouplingSection,
    #[serde(default)]
    customers: Vec<Customer>,
    outage: OutageSpec,
    #[serde(default)]
    params: SolverParams,
}

fn empty_water() -> WaterSection {
    WaterSection { nodes: Vec::new(), branches: Vec::new() }
}

fn empty_gas() -> GasSection {
    GasSection { nodes: Vec::new(), branches: Vec::new() }
}

impl From<Document> for ScenarioFile {
    fn from(d: Document) -> Self {
        let system = IntegratedSystem {
            name: d.name,
            base: d.base,
            electric: ElectricNetwork { nodes: d.electric.nodes, branches: d.electric.branches, dgs: d.electric.dgs },
            water: WaterNetwork { nodes: d.water.nodes, branches: d.water.branches, pumps: d.coupling.pumps },
            gas: GasNetwork { nodes: d.gas.nodes, branches: d.gas.branches, compressors: d.coupling.compressors },
            customers: d.customers,
        };
        ScenarioFile { system, outage: d.outage, params: d.params, notes: d.notes }
    }
}

impl From<&ScenarioFile> for Document {
    fn from(s: &ScenarioFile) -> Self {
        let sys = &s.system;
        Document {
            name: sys.name.clone(),
            notes: s.notes.clone(),
            base: sys.base,
            electric: ElectricSection {
                nodes: sys.electric.nodes.clone(),
                branches: sys.electric.branches.clone(),
                dgs: sys.electric.dgs.clone(),
            },
            water: WaterSection { nodes: sys.water.nodes.clone(), branches: sys.water.branches.clone() },
            gas: GasSection { nodes: sys.gas.nodes.clone(), branches: sys.gas.branches.clone() },
            coupling: CouplingSection { pumps: sys.water.pumps.clone(), compressors: sys.gas.compressors.clone() },
            customers: sys.customers.clone(),
            outage: s.outage.clone(),
            params: s.params.clone(),
        }
    }
}

/// Parses a scenario document and resolves every id it mentions.
pub fn load_scenario(bytes: &[u8]) -> Result<ScenarioFile, ScenarioError> {
    let doc: Document = serde_json::from_slice(bytes)?;
    let scenario = ScenarioFile::from(doc);
    check_references(&scenario)?;
    Ok(scenario)
}

pub fn save_scenario(scenario: &ScenarioFile) -> String {
    let doc = Document::from(scenario);
    let mut out = serde_json::to_string_pretty(&doc).expect("scenario documents always serialize");
    out.push('\n');
    out
}

fn check_references(s: &ScenarioFile) -> Result<(), ScenarioError> {
    let report = validate_system(&s.system);
    if let Some(v) = report.violations.iter().find(|v| v.kind == ViolationKind::DanglingReference) {
        return Err(ScenarioError::Reference { location: v.location.clone(), message: v.message.clone() });
    }
    for id in &s.outage.damaged_electric_branches {
        if s.system.electric_branch(id).is_none() {
            return Err(ScenarioError::Reference {
                location: "outage.damaged_electric_branches".into(),
                message: format!("unknown branch `{id}`"),
            });
        }
    }
    if s.system.electric_node(s.outage.root_node).is_none() {
        return Err(ScenarioError::Reference {
            location: "outage.root_node".into(),
            message: format!("unknown electric node {}", s.outage.root_node),
        });
    }
    Ok(())
}

pub const BUNDLED: [&str; 3] = ["case1", "case2", "toy-two-pump"];

fn bundled_text(name: &str) -> Option<&'static str> {
    match name {
        "case1" => Some(include_str!("../data/case1.json")),
        "case2" => Some(include_str!("../data/case2.json")),
        "toy-two-pump" => Some(include_str!("../data/toy-two-pump.json")),
        _ => None,
    }
}

/// Loads a bundled dataset; a trailing `.json` is accepted.
pub fn bundled(name: &str) -> Result<ScenarioFile, ScenarioError> {
    let key = name.strip_suffix(".json").unwrap_or(name);
    let text = bundled_text(key).ok_or_else(|| ScenarioError::UnknownDataset(name.to_string()))?;
    load_scenario(text.as_bytes())
}

/// A path on disk if it exists, otherwise a bundled dataset name.
pub fn resolve(arg: &str) -> Result<ScenarioFile, ScenarioError> {
    let path = std::path::Path::new(arg);
    if path.is_file() {
        return load_scenario(&std::fs::read(path)?);
    }
    let stem = path.file_name().and_then(|f| f.to_str()).unwrap_or(arg);
    match bundled(stem) {
        Err(ScenarioError::UnknownDataset(_)) if !path.exists() => Err(ScenarioError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no scenario file or bundled dataset named `{arg}`"),
        ))),
        other => other,
    }
}
