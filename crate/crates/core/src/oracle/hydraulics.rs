use std::collections::BTreeMap;

use crate::network::{CustomerId, GasBranchKind, IntegratedSystem, NodeId, TreeIndex, WaterBranchKind};
use crate::plan::RestorationPlan;
use crate::scenario::FlowUnit;

/// Flows per branch (m³/h) and potentials per node, in network order.
/// Potentials are `None` where no supplied path fixes them (below an idle
/// device).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    pub flows: Vec<f64>,
    pub potentials: Vec<Option<f64>>,
    /// Outflow of each source node, keyed by id.
    pub supply: BTreeMap<NodeId, f64>,
    pub violations: Vec<String>,
}

fn accumulate(tree: &TreeIndex, node_demand: &[f64], n_branches: usize) -> (Vec<f64>, BTreeMap<NodeId, f64>) {
    let mut sub = node_demand.to_vec();
    let mut flows = vec![0.0; n_branches];
    let mut supply = BTreeMap::new();
    for &u in tree.order.iter().rev() {
        match (tree.parent_branch[u], tree.parent_node[u]) {
            (Some(k), Some(p)) => {
                flows[k] = sub[u];
                sub[p] += sub[u];
            }
            _ => {
                supply.insert(tree.node_ids[u], sub[u]);
            }
        }
    }
    (flows, supply)
}

fn node_demands(tree: &TreeIndex, served: &BTreeMap<CustomerId, f64>, node_of: impl Fn(CustomerId) -> Option<NodeId>) -> Vec<f64> {
    let mut d = vec![0.0; tree.node_ids.len()];
    for (&c, &amount) in served {
        if let Some(i) = node_of(c).and_then(|n| tree.node_index.get(&n)) {
            d[*i] += amount;
        }
    }
    d
}

const REL: f64 = 1e-9;

/// Steady state of a radial water network for fixed customer deliveries
/// (m³/h) and pump on/off states; reservoirs hold their fixed heads.
pub fn radial_water_solve(
    system: &IntegratedSystem,
    tree: &TreeIndex,
    served: &BTreeMap<CustomerId, f64>,
    pumps_on: &BTreeMap<String, bool>,
    unit: FlowUnit,
) -> RadialState {
    let k = unit.from_m3h();
    let node_of = |c: CustomerId| system.customers.iter().find(|x| x.id == c).and_then(|x| x.water_node);
    let demand = node_demands(tree, served, node_of);
    let (flows, supply) = accumulate(tree, &demand, system.water.branches.len());
    let mut heads: Vec<Option<f64>> = vec![None; tree.node_ids.len()];
    let mut violations = Vec::new();
    for &u in &tree.order {
        let node = &system.water.nodes[u];
        let (Some(b), Some(p)) = (tree.parent_branch[u], tree.parent_node[u]) else {
            heads[u] = node.reservoir.as_ref().map(|r| r.fixed_head);
            continue;
        };
        let br = &system.water.branches[b];
        let w = flows[b];
        if w > br.w_max * (1.0 + REL) {
            violations.push(format!("water branch {} flow {w} exceeds limit {}", br.id, br.w_max));
        }
        heads[u] = match &br.kind {
            WaterBranchKind::Pipe { f } => heads[p].map(|h| h - f * (k * w).powi(2)),
            WaterBranchKind::Pump { pump_id } => {
                let pump = system.water.pumps.iter().find(|x| &x.id == pump_id);
                match (pump, pumps_on.get(pump_id).copied().unwrap_or(false)) {
                    (Some(pump), true) => heads[p].map(|h| h + pump.alpha * k * w + pump.beta),
                    _ => {
                        if w > REL {
                            violations.push(format!("water flows through idle pump {pump_id}"));
                        }
                        None
                    }
                }
            }
        };
        if let Some(h) = heads[u] {
            if h < node.h_min - REL * node.h_min.abs().max(1.0) {
                violations.push(format!("water node {} head {h} below minimum {}", node.id, node.h_min));
            }
        }
    }
    RadialState { flows, potentials: heads, supply, violations }
}

/// Compressor setting: on/off and the applied pressure-squared ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressorSetting {
    pub on: bool,
    pub ratio: f64,
}

/// Steady state of a radial gas network for fixed deliveries (m³/h),
/// source pressures and compressor settings.
pub fn radial_gas_solve(
    system: &IntegratedSystem,
    tree: &TreeIndex,
    served: &BTreeMap<CustomerId, f64>,
    compressors: &BTreeMap<String, CompressorSetting>,
    source_psi: &BTreeMap<NodeId, f64>,
) -> RadialState {
    let node_of = |c: CustomerId| system.customers.iter().find(|x| x.id == c).and_then(|x| x.gas_node);
    let demand = node_demands(tree, served, node_of);
    let (flows, supply) = accumulate(tree, &demand, system.gas.branches.len());
    let mut psi: Vec<Option<f64>> = vec![None; tree.node_ids.len()];
    let mut violations = Vec::new();
    for &u in &tree.order {
        let node = &system.gas.nodes[u];
        match (tree.parent_branch[u], tree.parent_node[u]) {
            (Some(b), Some(p)) => {
                let br = &system.gas.branches[b];
                let g = flows[b];
                if g > br.g_max * (1.0 + REL) {
                    violations.push(format!("gas branch {} flow {g} exceeds limit {}", br.id, br.g_max));
                }
                psi[u] = match &br.kind {
                    GasBranchKind::Pipe { c } => psi[p].map(|x| x - g * g / c),
                    GasBranchKind::Compressor { compressor_id } => {
                        let comp = system.gas.compressors.iter().find(|x| &x.id == compressor_id);
                        match (comp, compressors.get(compressor_id)) {
                            (Some(comp), Some(set)) if set.on => {
                                if set.ratio < 1.0 - REL || set.ratio > comp.gamma * (1.0 + REL) {
                                    violations.push(format!(
                                        "compressor {compressor_id} ratio {} outside [1, {}]",
                                        set.ratio, comp.gamma
                                    ));
                                }
                                psi[p].map(|x| x * set.ratio)
                            }
                            _ => {
                                if g > REL {
                                    violations.push(format!("gas flows through idle compressor {compressor_id}"));
                                }
                                None
                            }
                        }
                    }
                };
            }
            _ => psi[u] = source_psi.get(&node.id).copied(),
        }
        if let Some(x) = psi[u] {
            let tol = REL * node.psi_max.abs().max(1.0);
            if x < node.psi_min - tol || x > node.psi_max + tol {
                violations.push(format!("gas node {} pressure {x} outside [{}, {}]", node.id, node.psi_min, node.psi_max));
            }
        }
    }
    RadialState { flows, potentials: psi, supply, violations }
}

/// Water oracle inputs taken from a plan.
pub fn water_inputs(plan: &RestorationPlan) -> (BTreeMap<CustomerId, f64>, BTreeMap<String, bool>) {
    let served = plan.customers.iter().map(|c| (c.id, c.water)).collect();
    let on = plan.devices.iter().map(|d| (d.id.clone(), d.on)).collect();
    (served, on)
}

/// Gas oracle inputs taken from a plan: deliveries, compressor ratios
/// implied by the planned pressures, and source pressures.
pub fn gas_inputs(
    system: &IntegratedSystem,
    plan: &RestorationPlan,
) -> (BTreeMap<CustomerId, f64>, BTreeMap<String, CompressorSetting>, BTreeMap<NodeId, f64>) {
    let served = plan.customers.iter().map(|c| (c.id, c.gas)).collect();
    let psi: BTreeMap<NodeId, f64> = plan.gas_nodes.iter().map(|n| (n.id, n.value)).collect();
    let mut settings = BTreeMap::new();
    for comp in &system.gas.compressors {
        let on = plan.devices.iter().any(|d| d.id == comp.id && d.on);
        let ratio = system
            .gas
            .branches
            .iter()
            .find(|b| b.id == comp.gas_branch)
            .map_or(1.0, |b| psi.get(&b.to).copied().unwrap_or(0.0) / psi.get(&b.from).copied().unwrap_or(1.0));
        settings.insert(comp.id.clone(), CompressorSetting { on, ratio });
    }
    let sources = system.gas.nodes.iter().filter(|n| n.source).map(|n| (n.id, psi.get(&n.id).copied().unwrap_or(0.0))).collect();
    (served, settings, sources)
}
