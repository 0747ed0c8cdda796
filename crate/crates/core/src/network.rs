//! Static description of the coupled electricity / water / gas system and
//! its structural validation.
//!
//! Electric quantities are per-unit on [`UnitBase`], except customer and
//! device ratings which are kept in kW / kVA as they appear in datasets.
//! Water and gas quantities stay in physical units (m, m³/h, pressure²).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TopologyError;

pub type NodeId = u32;
pub type CustomerId = u32;

/// Where a record's numbers come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Published,
    ExternalReference,
    Synthesized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeRole {
    Dg,
    CustomerLoad,
    PumpLoad,
    CompressorLoad,
}

pub const DEFAULT_V_MIN_SQ: f64 = 0.95 * 0.95;
pub const DEFAULT_V_MAX_SQ: f64 = 1.05 * 1.05;

fn default_v_min_sq() -> f64 {
    DEFAULT_V_MIN_SQ
}

fn default_v_max_sq() -> f64 {
    DEFAULT_V_MAX_SQ
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectricNode {
    pub id: NodeId,
    #[serde(default = "default_v_min_sq")]
    pub v_min_sq: f64,
    #[serde(default = "default_v_max_sq")]
    pub v_max_sq: f64,
    #[serde(default)]
    pub roles: BTreeSet<NodeRole>,
    #[serde(default)]
    pub attached_device_ids: Vec<String>,
}

/// Series impedance in per-unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impedance {
    pub r: f64,
    pub x: f64,
}

impl Impedance {
    pub fn norm_sq(&self) -> f64 {
        self.r * self.r + self.x * self.x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchStatus {
    ClosedFixed,
    Switchable,
    Damaged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectricBranch {
    pub id: String,
    pub from: NodeId,
    pub to: NodeId,
    pub impedance: Impedance,
    /// Squared current limit, per-unit².
    pub l_max: f64,
    pub status: BranchStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributedGenerator {
    pub node: NodeId,
    pub capacity_kva: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioWeights {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Power factor assumed for customer loads given in kW only.
pub const DEFAULT_LOAD_POWER_FACTOR: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadDemand {
    pub p_kw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_kvar: Option<f64>,
}

impl LoadDemand {
    /// Reactive demand; 0.9 lagging when the dataset only gives kW.
    pub fn reactive_kvar(&self) -> f64 {
        self.q_kvar.unwrap_or_else(|| {
            let pf = DEFAULT_LOAD_POWER_FACTOR;
            self.p_kw * (1.0 - pf * pf).sqrt() / pf
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    pub id: CustomerId,
    /// Priority weight ω.
    pub priority: f64,
    pub weights: RatioWeights,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electric_node: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub water_node: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gas_node: Option<NodeId>,
    pub s_rate: LoadDemand,
    /// Water demand, m³/h.
    #[serde(default)]
    pub w_rate: f64,
    /// Gas demand, m³/h.
    #[serde(default)]
    pub g_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl Customer {
    pub fn has_electric_term(&self) -> bool {
        self.weights.a > 0.0 && self.electric_node.is_some()
    }

    pub fn has_water_term(&self) -> bool {
        self.weights.b > 0.0 && self.water_node.is_some()
    }

    pub fn has_gas_term(&self) -> bool {
        self.weights.c > 0.0 && self.gas_node.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    /// Fixed water head, m.
    pub fixed_head: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterNode {
    pub id: NodeId,
    /// Nodal demand, m³/h.
    pub demand_rate: f64,
    /// Minimum head, m.
    pub h_min: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservoir: Option<Reservoir>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum WaterBranchKind {
    /// Head loss Δh = F·W² with W in m³/s.
    Pipe { f: f64 },
    Pump { pump_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterBranch {
    pub id: String,
    pub from: NodeId,
    pub to: NodeId,
    pub kind: WaterBranchKind,
    /// Flow limit, m³/h.
    pub w_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterPump {
    pub id: String,
    pub water_branch: String,
    pub electric_node: NodeId,
    pub rated_power_kw: f64,
    pub alpha: f64,
    pub beta: f64,
    pub efficiency: f64,
    /// Reactive-to-active power ratio.
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasNode {
    pub id: NodeId,
    /// Nodal demand, m³/h.
    pub demand_rate: f64,
    pub psi_min: f64,
    pub psi_max: f64,
    #[serde(default)]
    pub source: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GasBranchKind {
    /// Weymouth C·Δψ = G² with G in m³/h.
    Pipe { c: f64 },
    Compressor { compressor_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasBranch {
    pub id: String,
    pub from: NodeId,
    pub to: NodeId,
    pub kind: GasBranchKind,
    /// Flow limit, m³/h.
    pub g_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasCompressor {
    pub id: String,
    pub gas_branch: String,
    pub electric_node: NodeId,
    pub rated_power_kw: f64,
    /// Maximum pressure-squared ratio across the unit.
    pub gamma: f64,
    /// kW per m³/h.
    pub sigma: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitBase {
    pub kva: f64,
    pub kv: f64,
}

impl Default for UnitBase {
    fn default() -> Self {
        UnitBase { kva: 1000.0, kv: 12.66 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ElectricNetwork {
    pub nodes: Vec<ElectricNode>,
    pub branches: Vec<ElectricBranch>,
    #[serde(default)]
    pub dgs: Vec<DistributedGenerator>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WaterNetwork {
    pub nodes: Vec<WaterNode>,
    pub branches: Vec<WaterBranch>,
    #[serde(default)]
    pub pumps: Vec<WaterPump>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GasNetwork {
    pub nodes: Vec<GasNode>,
    pub branches: Vec<GasBranch>,
    #[serde(default)]
    pub compressors: Vec<GasCompressor>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntegratedSystem {
    pub name: String,
    pub base: UnitBase,
    pub electric: ElectricNetwork,
    pub water: WaterNetwork,
    pub gas: GasNetwork,
    pub customers: Vec<Customer>,
}

impl IntegratedSystem {
    pub fn electric_node(&self, id: NodeId) -> Option<&ElectricNode> {
        self.electric.nodes.iter().find(|n| n.id == id)
    }

    pub fn water_node(&self, id: NodeId) -> Option<&WaterNode> {
        self.water.nodes.iter().find(|n| n.id == id)
    }

    pub fn gas_node(&self, id: NodeId) -> Option<&GasNode> {
        self.gas.nodes.iter().find(|n| n.id == id)
    }

    pub fn electric_branch(&self, id: &str) -> Option<&ElectricBranch> {
        self.electric.branches.iter().find(|b| b.id == id)
    }

    pub fn pump_branch_index(&self, pump: &WaterPump) -> Option<usize> {
        self.water.branches.iter().position(|b| b.id == pump.water_branch)
    }

    pub fn compressor_branch_index(&self, comp: &GasCompressor) -> Option<usize> {
        self.gas.branches.iter().position(|b| b.id == comp.gas_branch)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutageSpec {
    #[serde(default)]
    pub damaged_electric_branches: BTreeSet<String>,
    #[serde(default)]
    pub grid_available: bool,
    pub root_node: NodeId,
}

impl OutageSpec {
    pub fn is_damaged(&self, branch: &ElectricBranch) -> bool {
        branch.status == BranchStatus::Damaged || self.damaged_electric_branches.contains(&branch.id)
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    Duplicate,
    BadParameter,
    DanglingReference,
    RatioWeights,
    NotRadial,
    SourceCount,
    Orientation,
    RoleMismatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            location: location.into(),
            message: message.into(),
        });
    }
}

const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Checks every structural invariant of the system. Never fails; each
/// problem becomes one report entry.
pub fn validate_system(system: &IntegratedSystem) -> ValidationReport {
    let mut report = ValidationReport::default();
    validate_electric(system, &mut report);
    validate_water(system, &mut report);
    validate_gas(system, &mut report);
    validate_customers(system, &mut report);
    report
}

fn check_unique<T: Ord + fmt::Display + Clone>(
    ids: impl Iterator<Item = T>,
    what: &str,
    report: &mut ValidationReport,
) {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id.clone()) {
            report.push(ViolationKind::Duplicate, format!("{what} {id}"), "identifier appears more than once");
        }
    }
}

fn validate_electric(system: &IntegratedSystem, report: &mut ValidationReport) {
    let net = &system.electric;
    check_unique(net.nodes.iter().map(|n| n.id), "electric node", report);
    check_unique(net.branches.iter().map(|b| b.id.clone()), "electric branch", report);
    let ids: BTreeSet<NodeId> = net.nodes.iter().map(|n| n.id).collect();

    if !(system.base.kva > 0.0) || !(system.base.kv > 0.0) {
        report.push(ViolationKind::BadParameter, "unit base", "kVA and kV bases must be positive");
    }
    for n in &net.nodes {
        let loc = format!("electric node {}", n.id);
        if !(n.v_min_sq > 0.0) {
            report.push(ViolationKind::BadParameter, &loc, "v_min_sq must be positive");
        }
        if !(n.v_min_sq <= n.v_max_sq) {
            report.push(ViolationKind::BadParameter, &loc, "v_min_sq exceeds v_max_sq");
        }
    }
    for b in &net.branches {
        let loc = format!("electric branch {}", b.id);
        if !(b.l_max > 0.0) {
            report.push(ViolationKind::BadParameter, &loc, "l_max must be positive");
        }
        if !(b.impedance.norm_sq() > 0.0) {
            report.push(ViolationKind::BadParameter, &loc, "impedance magnitude must be positive");
        }
        if b.from == b.to {
            report.push(ViolationKind::BadParameter, &loc, "endpoints must be distinct");
        }
        for end in [b.from, b.to] {
            if !ids.contains(&end) {
                report.push(ViolationKind::DanglingReference, &loc, format!("unknown node {end}"));
            }
        }
    }
    for dg in &net.dgs {
        let loc = format!("DG at node {}", dg.node);
        if !(dg.capacity_kva > 0.0) {
            report.push(ViolationKind::BadParameter, &loc, "capacity must be positive");
        }
        match system.electric_node(dg.node) {
            None => report.push(ViolationKind::DanglingReference, &loc, "unknown electric node"),
            Some(n) if !n.roles.contains(&NodeRole::Dg) => {
                report.push(ViolationKind::RoleMismatch, &loc, "node lacks role dg")
            }
            _ => {}
        }
    }
    for p in &system.water.pumps {
        let loc = format!("pump {}", p.id);
        match system.electric_node(p.electric_node) {
            None => report.push(ViolationKind::DanglingReference, &loc, "unknown electric node"),
            Some(n) if !n.roles.contains(&NodeRole::PumpLoad) => {
                report.push(ViolationKind::RoleMismatch, &loc, "electric node lacks role pump-load")
            }
            _ => {}
        }
    }
    for c in &system.gas.compressors {
        let loc = format!("compressor {}", c.id);
        match system.electric_node(c.electric_node) {
            None => report.push(ViolationKind::DanglingReference, &loc, "unknown electric node"),
            Some(n) if !n.roles.contains(&NodeRole::CompressorLoad) => report.push(
                ViolationKind::RoleMismatch,
                &loc,
                "electric node lacks role compressor-load",
            ),
            _ => {}
        }
    }
}

/// Undirected edges of a network given as (from, to) pairs.
fn tree_violations(
    nodes: &[NodeId],
    edges: &[(NodeId, NodeId)],
    sources: &BTreeSet<NodeId>,
    what: &str,
    report: &mut ValidationReport,
) -> bool {
    let index: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut dsu = DisjointSet::new(nodes.len());
    let mut cyclic = false;
    for &(a, b) in edges {
        let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) else {
            continue;
        };
        if !dsu.union(ia, ib) {
            cyclic = true;
        }
    }
    if cyclic {
        report.push(ViolationKind::NotRadial, format!("{what} network"), format!("{what} graph not radial"));
    }
    let mut per_component: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, _) in nodes.iter().enumerate() {
        per_component.entry(dsu.find(i)).or_insert(0);
    }
    for s in sources {
        if let Some(&i) = index.get(s) {
            *per_component.entry(dsu.find(i)).or_insert(0) += 1;
        }
    }
    let mut ok = !cyclic;
    for (root, count) in per_component {
        if count != 1 {
            ok = false;
            report.push(
                ViolationKind::SourceCount,
                format!("{what} component containing node {}", nodes[root]),
                format!("expected exactly one source, found {count}"),
            );
        }
    }
    ok
}

/// Flows are sign-constrained, so every branch must point away from the
/// reservoir / gas source of its tree.
fn orientation_violations(
    nodes: &[NodeId],
    edges: &[(String, NodeId, NodeId)],
    sources: &BTreeSet<NodeId>,
    what: &str,
    report: &mut ValidationReport,
) {
    let pairs: Vec<(NodeId, NodeId)> = edges.iter().map(|e| (e.1, e.2)).collect();
    let Ok(tree) = TreeIndex::build(nodes, &pairs, sources) else {
        return;
    };
    for (k, (id, from, to)) in edges.iter().enumerate() {
        let Some(&child) = tree.node_index.get(to) else { continue };
        if tree.parent_branch[child] != Some(k) || tree.node_index.get(from).is_none() {
            report.push(
                ViolationKind::Orientation,
                format!("{what} branch {id}"),
                "branch must be oriented away from the source",
            );
        }
    }
}

fn validate_water(system: &IntegratedSystem, report: &mut ValidationReport) {
    let net = &system.water;
    check_unique(net.nodes.iter().map(|n| n.id), "water node", report);
    check_unique(net.branches.iter().map(|b| b.id.clone()), "water branch", report);
    check_unique(net.pumps.iter().map(|p| p.id.clone()), "pump", report);
    let ids: BTreeSet<NodeId> = net.nodes.iter().map(|n| n.id).collect();
    for n in &net.nodes {
        if !(n.demand_rate >= 0.0) {
            report.push(ViolationKind::BadParameter, format!("water node {}", n.id), "demand must be nonnegative");
        }
    }
    for b in &net.branches {
        let loc = format!("water branch {}", b.id);
        if !(b.w_max > 0.0) {
            report.push(ViolationKind::BadParameter, &loc, "w_max must be positive");
        }
        for end in [b.from, b.to] {
            if !ids.contains(&end) {
                report.push(ViolationKind::DanglingReference, &loc, format!("unknown node {end}"));
            }
        }
        match &b.kind {
            WaterBranchKind::Pipe { f } => {
                if !(*f > 0.0) {
                    report.push(ViolationKind::BadParameter, &loc, "pipe coefficient F must be positive");
                }
            }
            WaterBranchKind::Pump { pump_id } => match net.pumps.iter().find(|p| &p.id == pump_id) {
                None => report.push(ViolationKind::DanglingReference, &loc, format!("unknown pump {pump_id}")),
                Some(p) if p.water_branch != b.id => {
                    report.push(ViolationKind::DanglingReference, &loc, format!("pump {pump_id} names another branch"))
                }
                _ => {}
            },
        }
    }
    for p in &net.pumps {
        let loc = format!("pump {}", p.id);
        if !(p.alpha > 0.0 && p.beta > 0.0 && p.rated_power_kw > 0.0) {
            report.push(ViolationKind::BadParameter, &loc, "alpha, beta and rated power must be positive");
        }
        if !(p.efficiency > 0.0 && p.efficiency <= 1.0) {
            report.push(ViolationKind::BadParameter, &loc, "efficiency must lie in (0, 1]");
        }
        if !(p.phi >= 0.0) {
            report.push(ViolationKind::BadParameter, &loc, "phi must be nonnegative");
        }
        match net.branches.iter().find(|b| b.id == p.water_branch) {
            Some(WaterBranch { kind: WaterBranchKind::Pump { pump_id }, .. }) if pump_id == &p.id => {}
            _ => report.push(ViolationKind::DanglingReference, &loc, "water branch does not host this pump"),
        }
    }
    let nodes: Vec<NodeId> = net.nodes.iter().map(|n| n.id).collect();
    let sources: BTreeSet<NodeId> = net.nodes.iter().filter(|n| n.reservoir.is_some()).map(|n| n.id).collect();
    let pairs: Vec<(NodeId, NodeId)> = net.branches.iter().map(|b| (b.from, b.to)).collect();
    if !nodes.is_empty() && tree_violations(&nodes, &pairs, &sources, "water", report) {
        {
            let edges: Vec<_> = net.branches.iter().map(|b| (b.id.clone(), b.from, b.to)).collect();
            orientation_violations(&nodes, &edges, &sources, "water", report);
        }
    }
}

fn validate_gas(system: &IntegratedSystem, report: &mut ValidationReport) {
    let net = &system.gas;
    check_unique(net.nodes.iter().map(|n| n.id), "gas node", report);
    check_unique(net.branches.iter().map(|b| b.id.clone()), "gas branch", report);
    check_unique(net.compressors.iter().map(|c| c.id.clone()), "compressor", report);
    let ids: BTreeSet<NodeId> = net.nodes.iter().map(|n| n.id).collect();
    for n in &net.nodes {
        let loc = format!("gas node {}", n.id);
        if !(n.demand_rate >= 0.0) {
            report.push(ViolationKind::BadParameter, &loc, "demand must be nonnegative");
        }
        if !(0.0 <= n.psi_min && n.psi_min <= n.psi_max) {
            report.push(ViolationKind::BadParameter, &loc, "pressure bounds must satisfy 0 <= psi_min <= psi_max");
        }
    }
    for b in &net.branches {
        let loc = format!("gas branch {}", b.id);
        if !(b.g_max > 0.0) {
            report.push(ViolationKind::BadParameter, &loc, "g_max must be positive");
        }
        for end in [b.from, b.to] {
            if !ids.contains(&end) {
                report.push(ViolationKind::DanglingReference, &loc, format!("unknown node {end}"));
            }
        }
        match &b.kind {
            GasBranchKind::Pipe { c } => {
                if !(*c > 0.0) {
                    report.push(ViolationKind::BadParameter, &loc, "Weymouth coefficient C must be positive");
                }
            }
            GasBranchKind::Compressor { compressor_id } => {
                match net.compressors.iter().find(|c| &c.id == compressor_id) {
                    None => report.push(
                        ViolationKind::DanglingReference,
                        &loc,
                        format!("unknown compressor {compressor_id}"),
                    ),
                    Some(c) if c.gas_branch != b.id => report.push(
                        ViolationKind::DanglingReference,
                        &loc,
                        format!("compressor {compressor_id} names another branch"),
                    ),
                    _ => {}
                }
            }
        }
    }
    for c in &net.compressors {
        let loc = format!("compressor {}", c.id);
        if !(c.gamma > 1.0) {
            report.push(ViolationKind::BadParameter, &loc, "gamma must exceed 1");
        }
        if !(c.sigma > 0.0 && c.rated_power_kw > 0.0) {
            report.push(ViolationKind::BadParameter, &loc, "sigma and rated power must be positive");
        }
        if !(c.phi >= 0.0) {
            report.push(ViolationKind::BadParameter, &loc, "phi must be nonnegative");
        }
        match net.branches.iter().find(|b| b.id == c.gas_branch) {
            Some(GasBranch { kind: GasBranchKind::Compressor { compressor_id }, .. }) if compressor_id == &c.id => {}
            _ => report.push(ViolationKind::DanglingReference, &loc, "gas branch does not host this compressor"),
        }
    }
    let nodes: Vec<NodeId> = net.nodes.iter().map(|n| n.id).collect();
    let sources: BTreeSet<NodeId> = net.nodes.iter().filter(|n| n.source).map(|n| n.id).collect();
    let pairs: Vec<(NodeId, NodeId)> = net.branches.iter().map(|b| (b.from, b.to)).collect();
    if !nodes.is_empty() && tree_violations(&nodes, &pairs, &sources, "gas", report) {
        {
            let edges: Vec<_> = net.branches.iter().map(|b| (b.id.clone(), b.from, b.to)).collect();
            orientation_violations(&nodes, &edges, &sources, "gas", report);
        }
    }
}

fn validate_customers(system: &IntegratedSystem, report: &mut ValidationReport) {
    check_unique(system.customers.iter().map(|c| c.id), "customer", report);
    for c in &system.customers {
        let loc = format!("customer {}", c.id);
        let w = c.weights;
        if !(c.priority > 0.0) {
            report.push(ViolationKind::BadParameter, &loc, "priority weight must be positive");
        }
        if !(w.a >= 0.0 && w.b >= 0.0 && w.c >= 0.0) {
            report.push(ViolationKind::RatioWeights, &loc, "ratio weights must be nonnegative");
        }
        if !((w.a + w.b + w.c - 1.0).abs() <= WEIGHT_SUM_TOL) {
            report.push(
                ViolationKind::RatioWeights,
                &loc,
                format!("ratio weights sum ≠ 1 (sum = {})", w.a + w.b + w.c),
            );
        }
        if let Some(n) = c.electric_node {
            if system.electric_node(n).is_none() {
                report.push(ViolationKind::DanglingReference, &loc, format!("unknown electric node {n}"));
            } else if w.a > 0.0 && !system.electric_node(n).unwrap().roles.contains(&NodeRole::CustomerLoad) {
                report.push(ViolationKind::RoleMismatch, &loc, "electric node lacks role customer-load");
            }
        }
        if let Some(n) = c.water_node {
            if system.water_node(n).is_none() {
                report.push(ViolationKind::DanglingReference, &loc, format!("unknown water node {n}"));
            }
        }
        if let Some(n) = c.gas_node {
            if system.gas_node(n).is_none() {
                report.push(ViolationKind::DanglingReference, &loc, format!("unknown gas node {n}"));
            }
        }
        if w.a > 0.0 && (c.electric_node.is_none() || !(c.s_rate.p_kw > 0.0)) {
            report.push(ViolationKind::BadParameter, &loc, "electric weight needs an electric node and positive demand");
        }
        if w.b > 0.0 && (c.water_node.is_none() || !(c.w_rate > 0.0)) {
            report.push(ViolationKind::BadParameter, &loc, "water weight needs a water node and positive demand");
        }
        if w.c > 0.0 && (c.gas_node.is_none() || !(c.g_rate > 0.0)) {
            report.push(ViolationKind::BadParameter, &loc, "gas weight needs a gas node and positive demand");
        }
    }
}

// ---------------------------------------------------------------------------
// Topology
// ---------------------------------------------------------------------------

pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Rooted forest view of a radial water or gas network.
#[derive(Debug, Clone)]
pub struct TreeIndex {
    pub node_ids: Vec<NodeId>,
    pub node_index: HashMap<NodeId, usize>,
    /// Root (source) node index of each node's tree.
    pub root_of: Vec<usize>,
    /// The unique branch carrying flow into each node; `None` for roots.
    pub parent_branch: Vec<Option<usize>>,
    pub parent_node: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    /// Root-to-leaf (BFS) order over all nodes.
    pub order: Vec<usize>,
}

impl TreeIndex {
    /// `edges` are (from, to) per branch index. Every component must hold
    /// exactly one source and no cycle.
    pub fn build(nodes: &[NodeId], edges: &[(NodeId, NodeId)], sources: &BTreeSet<NodeId>) -> Result<Self, TopologyError> {
        let node_index: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let n = nodes.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (k, &(a, b)) in edges.iter().enumerate() {
            let ia = *node_index.get(&a).ok_or(TopologyError::UnknownNode(a))?;
            let ib = *node_index.get(&b).ok_or(TopologyError::UnknownNode(b))?;
            adj[ia].push((ib, k));
            adj[ib].push((ia, k));
        }
        let mut root_of = vec![usize::MAX; n];
        let mut parent_branch = vec![None; n];
        let mut parent_node = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut order = Vec::with_capacity(n);
        for s in sources {
            let &r = node_index.get(s).ok_or(TopologyError::UnknownNode(*s))?;
            if root_of[r] != usize::MAX {
                return Err(TopologyError::MultipleSources(*s));
            }
            root_of[r] = r;
            let mut queue = VecDeque::from([r]);
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for &(v, k) in &adj[u] {
                    if Some(k) == parent_branch[u] {
                        continue;
                    }
                    if root_of[v] != usize::MAX {
                        return Err(if root_of[v] == r {
                            TopologyError::Cycle(nodes[v])
                        } else {
                            TopologyError::MultipleSources(nodes[v])
                        });
                    }
                    root_of[v] = r;
                    parent_branch[v] = Some(k);
                    parent_node[v] = Some(u);
                    children[u].push(v);
                    queue.push_back(v);
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| root_of[i] == usize::MAX) {
            return Err(TopologyError::NoSource(nodes[i]));
        }
        Ok(TreeIndex { node_ids: nodes.to_vec(), node_index, root_of, parent_branch, parent_node, children, order })
    }

    pub fn is_root(&self, idx: usize) -> bool {
        self.root_of[idx] == idx
    }

    /// All nodes strictly below `id`, in BFS order.
    pub fn downstream(&self, id: NodeId) -> Vec<NodeId> {
        let Some(&start) = self.node_index.get(&id) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut queue: VecDeque<usize> = self.children[start].iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            out.push(self.node_ids[u]);
            queue.extend(self.children[u].iter().copied());
        }
        out
    }

    /// Branch indices on the path from the root down to `id`.
    pub fn path_from_root(&self, id: NodeId) -> Vec<usize> {
        let mut path = Vec::new();
        let Some(&mut_start) = self.node_index.get(&id) else {
            return path;
        };
        let mut u = mut_start;
        while let Some(k) = self.parent_branch[u] {
            path.push(k);
            u = self.parent_node[u].expect("parent branch implies parent node");
        }
        path.reverse();
        path
    }
}

/// Electric graph after removing damaged branches.
#[derive(Debug, Clone)]
pub struct ElectricTopology {
    pub node_ids: Vec<NodeId>,
    pub node_index: HashMap<NodeId, usize>,
    /// Branch indices incident to each node (all branches, damaged included).
    pub incident: Vec<Vec<usize>>,
    pub root: usize,
    /// Whether each node lies in the root's connected component.
    pub in_component: Vec<bool>,
    /// Branch is undamaged and both ends lie in the root component.
    pub usable: Vec<bool>,
}

impl ElectricTopology {
    pub fn component_size(&self) -> usize {
        self.in_component.iter().filter(|&&b| b).count()
    }

    pub fn component_nodes(&self) -> BTreeSet<NodeId> {
        self.node_ids
            .iter()
            .zip(&self.in_component)
            .filter(|(_, &c)| c)
            .map(|(&id, _)| id)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TopologyIndex {
    pub electric: ElectricTopology,
    pub water: TreeIndex,
    pub gas: TreeIndex,
}

pub fn build_topology(system: &IntegratedSystem, outage: &OutageSpec) -> Result<TopologyIndex, TopologyError> {
    let electric = electric_topology(system, outage)?;
    let water = {
        let nodes: Vec<NodeId> = system.water.nodes.iter().map(|n| n.id).collect();
        let edges: Vec<_> = system.water.branches.iter().map(|b| (b.from, b.to)).collect();
        let sources = system.water.nodes.iter().filter(|n| n.reservoir.is_some()).map(|n| n.id).collect();
        TreeIndex::build(&nodes, &edges, &sources)?
    };
    let gas = {
        let nodes: Vec<NodeId> = system.gas.nodes.iter().map(|n| n.id).collect();
        let edges: Vec<_> = system.gas.branches.iter().map(|b| (b.from, b.to)).collect();
        let sources = system.gas.nodes.iter().filter(|n| n.source).map(|n| n.id).collect();
        TreeIndex::build(&nodes, &edges, &sources)?
    };
    Ok(TopologyIndex { electric, water, gas })
}

fn electric_topology(system: &IntegratedSystem, outage: &OutageSpec) -> Result<ElectricTopology, TopologyError> {
    let node_ids: Vec<NodeId> = system.electric.nodes.iter().map(|n| n.id).collect();
    let node_index: HashMap<NodeId, usize> = node_ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let root = *node_index.get(&outage.root_node).ok_or(TopologyError::RootDisconnected(outage.root_node))?;
    let n = node_ids.len();
    let mut incident = vec![Vec::new(); n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, b) in system.electric.branches.iter().enumerate() {
        let ia = *node_index.get(&b.from).ok_or(TopologyError::UnknownNode(b.from))?;
        let ib = *node_index.get(&b.to).ok_or(TopologyError::UnknownNode(b.to))?;
        incident[ia].push(k);
        incident[ib].push(k);
        if !outage.is_damaged(b) {
            adj[ia].push(ib);
            adj[ib].push(ia);
        }
    }
    let mut in_component = vec![false; n];
    in_component[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !in_component[v] {
                in_component[v] = true;
                queue.push_back(v);
            }
        }
    }
    let usable = system
        .electric
        .branches
        .iter()
        .map(|b| !outage.is_damaged(b) && in_component[node_index[&b.from]] && in_component[node_index[&b.to]])
        .collect();
    Ok(ElectricTopology { node_ids, node_index, incident, root, in_component, usable })
}

/// True when the branches flagged in `closed` form a spanning tree over the
/// root component of `topo`.
pub fn is_spanning_tree(system: &IntegratedSystem, topo: &ElectricTopology, closed: &[bool]) -> bool {
    let size = topo.component_size();
    let mut dsu = DisjointSet::new(topo.node_ids.len());
    let mut edges = 0usize;
    for (k, b) in system.electric.branches.iter().enumerate() {
        if !closed[k] {
            continue;
        }
        if !topo.usable[k] {
            return false;
        }
        if !dsu.union(topo.node_index[&b.from], topo.node_index[&b.to]) {
            return false;
        }
        edges += 1;
    }
    edges + 1 == size
}
