use std::collections::BTreeMap;

use crate::error::FormulationError;
use crate::network::{IntegratedSystem, TopologyIndex, WaterBranchKind};
use crate::scenario::{BigMPolicy, SolverParams};

/// Variable bounds the big-M constants are derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBounds {
    /// Largest `v_max` and smallest `v_min` over the root component.
    pub v_max: f64,
    pub v_min: f64,
    /// Per water node, in `system.water.nodes` order.
    pub head_lo: Vec<f64>,
    pub head_hi: Vec<f64>,
    pub component_size: usize,
    pub fictitious_demand: f64,
    /// Multiplier taking m³/h to the pump-curve flow unit.
    pub flow_scale: f64,
}

impl ModelBounds {
    /// Head upper bounds follow each tree from its reservoir, adding the
    /// largest gain of every pump on the way; pipes never raise head.
    pub fn derive(system: &IntegratedSystem, topo: &TopologyIndex, params: &SolverParams) -> Self {
        let el = &topo.electric;
        let mut v_max = f64::NEG_INFINITY;
        let mut v_min = f64::INFINITY;
        for (i, n) in system.electric.nodes.iter().enumerate() {
            if el.in_component[i] {
                v_max = v_max.max(n.v_max_sq);
                v_min = v_min.min(n.v_min_sq);
            }
        }
        let k = params.pump_flow_unit.from_m3h();
        let tree = &topo.water;
        let n = system.water.nodes.len();
        let mut head_lo = vec![0.0; n];
        let mut head_hi = vec![0.0; n];
        for &u in &tree.order {
            let node = &system.water.nodes[u];
            if let Some(res) = &node.reservoir {
                head_lo[u] = res.fixed_head;
                head_hi[u] = res.fixed_head;
                continue;
            }
            head_lo[u] = node.h_min;
            let parent = tree.parent_node[u].expect("non-reservoir water node has a parent");
            let branch = &system.water.branches[tree.parent_branch[u].expect("parent branch")];
            let gain = match &branch.kind {
                WaterBranchKind::Pipe { .. } => 0.0,
                WaterBranchKind::Pump { pump_id } => system
                    .water
                    .pumps
                    .iter()
                    .find(|p| &p.id == pump_id)
                    .map_or(0.0, |p| p.beta.max(p.alpha * k * branch.w_max + p.beta)),
            };
            head_hi[u] = head_hi[parent] + gain;
        }
        ModelBounds {
            v_max,
            v_min,
            head_lo,
            head_hi,
            component_size: el.component_size(),
            fictitious_demand: params.fictitious_demand,
            flow_scale: k,
        }
    }
}

/// Big-M constants keyed by branch id (voltage) or device id.
#[derive(Debug, Clone, PartialEq)]
pub struct BigMTable {
    pub volt: BTreeMap<String, f64>,
    pub fict: f64,
    pub pump_head: BTreeMap<String, f64>,
    pub pump_flow: BTreeMap<String, f64>,
    pub gas_press: BTreeMap<String, f64>,
    pub gas_flow: BTreeMap<String, f64>,
}

fn finite(value: f64, what: impl FnOnce() -> String) -> Result<f64, FormulationError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(FormulationError::UnboundedInput(what()))
    }
}

/// Voltage constant for one branch: covers the largest possible drop
/// mismatch when the branch is open.
pub fn voltage_big_m(v_max: f64, v_min: f64, r: f64, x: f64, l_max: f64) -> f64 {
    let s_bound = (v_max * l_max).sqrt();
    (v_max - v_min) + 2.0 * (r.abs() + x.abs()) * s_bound + (r * r + x * x) * l_max
}

pub fn derive_big_m(
    system: &IntegratedSystem,
    topo: &TopologyIndex,
    bounds: &ModelBounds,
    policy: BigMPolicy,
) -> Result<BigMTable, FormulationError> {
    let mut table = BigMTable {
        volt: BTreeMap::new(),
        fict: (bounds.component_size.saturating_sub(1)) as f64 * bounds.fictitious_demand,
        pump_head: BTreeMap::new(),
        pump_flow: BTreeMap::new(),
        gas_press: BTreeMap::new(),
        gas_flow: BTreeMap::new(),
    };
    let uniform = match policy {
        BigMPolicy::Derived => None,
        BigMPolicy::Uniform(m) => Some(finite(m, || "uniform big-M".into())?),
    };
    let pick = |derived: f64| uniform.unwrap_or(derived);

    for (k, b) in system.electric.branches.iter().enumerate() {
        if !topo.electric.usable[k] {
            continue;
        }
        finite(bounds.v_max - bounds.v_min, || "voltage bounds".into())?;
        let l_max = finite(b.l_max, || format!("current limit of branch {}", b.id))?;
        let m = voltage_big_m(bounds.v_max, bounds.v_min, b.impedance.r, b.impedance.x, l_max);
        table.volt.insert(b.id.clone(), pick(m));
    }

    for pump in &system.water.pumps {
        let Some(k) = system.pump_branch_index(pump) else { continue };
        let br = &system.water.branches[k];
        let w_max = finite(br.w_max, || format!("flow limit of water branch {}", br.id))?;
        let (i, j) = (topo.water.node_index[&br.from], topo.water.node_index[&br.to]);
        let lo = |u: usize| bounds.head_lo[u];
        let hi = |u: usize| bounds.head_hi[u];
        let span = (hi(i) - lo(j)).max(hi(j) - lo(i)).max(0.0);
        let m = pump.alpha.abs() * bounds.flow_scale * w_max + pump.beta.abs() + span;
        table.pump_head.insert(pump.id.clone(), pick(finite(m, || format!("head bounds around pump {}", pump.id))?));
        table.pump_flow.insert(pump.id.clone(), pick(w_max));
    }

    for comp in &system.gas.compressors {
        let Some(k) = system.compressor_branch_index(comp) else { continue };
        let br = &system.gas.branches[k];
        let g_max = finite(br.g_max, || format!("flow limit of gas branch {}", br.id))?;
        let psi = |id| system.gas_node(id).map_or(f64::NAN, |n| n.psi_max);
        let m = finite(psi(br.from).max(psi(br.to)), || format!("pressure bounds around compressor {}", comp.id))?;
        table.gas_press.insert(comp.id.clone(), pick(m));
        table.gas_flow.insert(comp.id.clone(), pick(g_max));
    }
    Ok(table)
}
