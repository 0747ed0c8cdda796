use crate::formulation::{GRAVITY, WATER_DENSITY};
use crate::network::{IntegratedSystem, TreeIndex, WaterBranchKind};
use crate::plan::{DeviceKind, RestorationPlan};
use crate::scenario::FlowUnit;

/// Electric power drawn by a pump moving `w` m³/s, in kW.
pub fn pump_power(w: f64, alpha: f64, beta: f64, efficiency: f64) -> f64 {
    WATER_DENSITY * GRAVITY / efficiency * (alpha * w * w + beta * w) / 1000.0
}

/// Compressor draw in kW for `g` m³/h at `sigma` kW per m³/h.
pub fn compressor_power(g: f64, sigma: f64) -> f64 {
    sigma * g
}

/// Largest relative excess of assigned pump power over the pump curve.
/// Pumps whose curve power is below 1e-9 kW are skipped; 0 when none remain.
pub fn exactness_gap(system: &IntegratedSystem, plan: &RestorationPlan, unit: FlowUnit) -> f64 {
    let k = unit.from_m3h();
    let mut r: f64 = 0.0;
    for d in plan.devices.iter().filter(|d| d.kind == DeviceKind::Pump && d.on) {
        let Some(p) = system.water.pumps.iter().find(|p| p.id == d.id) else { continue };
        let f = pump_power(d.flow * k, p.alpha, p.beta, p.efficiency);
        if f < 1e-9 {
            continue;
        }
        r = r.max((d.power_kw - f) / f);
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct ConditionFlags {
    /// Some customer's water demand is not fully restored.
    pub cond1: bool,
    /// No pipe is at its flow limit.
    pub cond2: bool,
    /// Each reservoir's head covers the pipe losses of its tree at full flow.
    pub cond3: bool,
}

impl ConditionFlags {
    pub fn all(&self) -> bool {
        self.cond1 && self.cond2 && self.cond3
    }
}

pub fn check_exactness_conditions(
    system: &IntegratedSystem,
    tree: &TreeIndex,
    plan: &RestorationPlan,
    unit: FlowUnit,
) -> ConditionFlags {
    const TOL: f64 = 1e-6;
    let k = unit.from_m3h();
    let cond1 = system.customers.iter().any(|c| {
        c.water_node.is_some()
            && c.w_rate > 0.0
            && plan.customers.iter().find(|s| s.id == c.id).is_none_or(|s| s.water < c.w_rate - TOL * c.w_rate.max(1.0))
    });
    let cond2 = system.water.branches.iter().zip(&plan.water_branches).all(|(b, s)| {
        !matches!(b.kind, WaterBranchKind::Pipe { .. }) || s.flow < b.w_max - TOL * b.w_max.max(1.0)
    });
    let mut loss_per_root = vec![0.0; system.water.nodes.len()];
    for br in &system.water.branches {
        if let WaterBranchKind::Pipe { f } = br.kind {
            if let Some(root) = tree.node_index.get(&br.to).map(|&j| tree.root_of[j]) {
                loss_per_root[root] += f * (k * br.w_max).powi(2);
            }
        }
    }
    let cond3 = system
        .water
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| n.reservoir.as_ref().map(|r| (i, r.fixed_head)))
        .all(|(i, head)| head >= loss_per_root[i]);
    ConditionFlags { cond1, cond2, cond3 }
}
