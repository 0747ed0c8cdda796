use std::collections::BTreeMap;

use serde::Serialize;

use super::physics::{check_exactness_conditions, compressor_power, exactness_gap, pump_power, ConditionFlags};
use crate::network::{
    build_topology, is_spanning_tree, GasBranchKind, IntegratedSystem, NodeId, OutageSpec, WaterBranchKind,
};
use crate::plan::{DeviceKind, RestorationPlan};
use crate::scenario::FlowUnit;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute, for per-unit electric quantities.
    pub electric: f64,
    /// Relative, for water and gas quantities.
    pub physical: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { electric: 1e-6, physical: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyResidual {
    pub family: String,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Where the largest residual occurs; empty when it is zero.
    pub location: String,
}

impl FamilyResidual {
    pub fn ok(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub families: Vec<FamilyResidual>,
    pub exactness_gap: f64,
    pub conditions: ConditionFlags,
    pub spanning_tree: bool,
    pub pass: bool,
}

impl FeasibilityReport {
    pub fn family(&self, name: &str) -> Option<&FamilyResidual> {
        self.families.iter().find(|f| f.family == name)
    }

    pub fn failures(&self) -> Vec<&FamilyResidual> {
        self.families.iter().filter(|f| !f.ok()).collect()
    }
}

struct Collector {
    families: BTreeMap<&'static str, (f64, String, f64)>,
}

impl Collector {
    fn new() -> Self {
        Collector { families: BTreeMap::new() }
    }

    fn declare(&mut self, family: &'static str, tol: f64) {
        self.families.entry(family).or_insert((0.0, String::new(), tol));
    }

    fn record(&mut self, family: &'static str, residual: f64, location: impl FnOnce() -> String) {
        let entry = self.families.get_mut(family).expect("family declared");
        let r = if residual.is_nan() { f64::INFINITY } else { residual.abs() };
        if r > entry.0 {
            entry.0 = r;
            entry.1 = location();
        }
    }
}

fn rel(residual: f64, scale: f64) -> f64 {
    residual / scale.abs().max(1.0)
}

/// Evaluates every original (unrelaxed) constraint at the plan point.
pub fn verify_plan(
    system: &IntegratedSystem,
    outage: &OutageSpec,
    plan: &RestorationPlan,
    tols: &Tolerances,
    unit: FlowUnit,
) -> FeasibilityReport {
    let mut c = Collector::new();
    let (te, tp) = (tols.electric, tols.physical);
    for f in ["electric-balance", "injection", "voltage-drop", "power-flow", "dg-capacity", "voltage-bounds", "current-bounds"] {
        c.declare(f, te);
    }
    for f in [
        "water-balance",
        "water-bounds",
        "head-difference",
        "darcy",
        "pump-head",
        "pump-power",
        "gas-balance",
        "gas-bounds",
        "pressure-difference",
        "weymouth",
        "compressor",
        "compressor-power",
    ] {
        c.declare(f, tp);
    }
    c.declare("shape", 0.0);

    let shapes_ok = plan.branches.len() == system.electric.branches.len()
        && plan.nodes.len() == system.electric.nodes.len()
        && plan.generators.len() == system.electric.dgs.len()
        && plan.customers.len() == system.customers.len()
        && plan.devices.len() == system.water.pumps.len() + system.gas.compressors.len()
        && plan.water_branches.len() == system.water.branches.len()
        && plan.water_nodes.len() == system.water.nodes.len()
        && plan.gas_branches.len() == system.gas.branches.len()
        && plan.gas_nodes.len() == system.gas.nodes.len();
    let topo = build_topology(system, outage).ok();
    if !shapes_ok || topo.is_none() {
        c.record("shape", f64::INFINITY, || "plan does not match the system".into());
        return finish(c, f64::NAN, ConditionFlags::default(), false);
    }
    let topo = topo.expect("checked");
    let el = &topo.electric;
    let sb = system.base.kva;
    let k = unit.from_m3h();

    // electric
    let closed: Vec<bool> = plan.branches.iter().map(|b| b.closed).collect();
    let spanning = is_spanning_tree(system, el, &closed);
    let v: BTreeMap<NodeId, f64> = plan.nodes.iter().map(|n| (n.id, n.v)).collect();
    for (i, n) in system.electric.nodes.iter().enumerate() {
        let st = &plan.nodes[i];
        if !el.in_component[i] {
            continue;
        }
        c.record("voltage-bounds", (n.v_min_sq - st.v).max(st.v - n.v_max_sq).max(0.0), || format!("node {}", n.id));
        let (mut p, mut q) = (st.p_inj, st.q_inj);
        for &kb in &el.incident[i] {
            let b = &system.electric.branches[kb];
            let s = &plan.branches[kb];
            if !s.closed {
                continue;
            }
            if b.to == n.id {
                p += s.p - b.impedance.r * s.l;
                q += s.q - b.impedance.x * s.l;
            } else {
                p -= s.p;
                q -= s.q;
            }
        }
        c.record("electric-balance", p.abs().max(q.abs()), || format!("node {}", n.id));

        let (mut pi, mut qi) = (0.0, 0.0);
        for (d, g) in system.electric.dgs.iter().enumerate() {
            if g.node == n.id {
                pi += plan.generators[d].p;
                qi += plan.generators[d].q;
            }
        }
        for (ci, cu) in system.customers.iter().enumerate() {
            if cu.electric_node == Some(n.id) && plan.customers[ci].restored {
                pi -= cu.s_rate.p_kw / sb;
                qi -= cu.s_rate.reactive_kvar() / sb;
            }
        }
        let devices = system
            .water
            .pumps
            .iter()
            .map(|p| (p.electric_node, p.phi))
            .chain(system.gas.compressors.iter().map(|c| (c.electric_node, c.phi)));
        for ((node, phi), st) in devices.zip(&plan.devices) {
            if node == n.id && st.on {
                pi -= st.power_kw / sb;
                qi -= phi * st.power_kw / sb;
            }
        }
        c.record("injection", (st.p_inj - pi).abs().max((st.q_inj - qi).abs()), || format!("node {}", n.id));
    }
    for (d, g) in system.electric.dgs.iter().enumerate() {
        let st = &plan.generators[d];
        let cap = g.capacity_kva / sb;
        let excess = (st.p * st.p + st.q * st.q).sqrt() - cap;
        c.record("dg-capacity", excess.max(0.0).max(-st.p), || format!("generator at node {}", g.node));
    }
    for (kb, b) in system.electric.branches.iter().enumerate() {
        let s = &plan.branches[kb];
        if !s.closed {
            c.record("current-bounds", s.p.abs().max(s.q.abs()).max(s.l.abs()), || format!("open branch {}", b.id));
            continue;
        }
        c.record("current-bounds", (s.l - b.l_max).max(-s.l).max(0.0), || format!("branch {}", b.id));
        let (vi, vj) = (v[&b.from], v[&b.to]);
        let drop = vi - vj - 2.0 * (b.impedance.r * s.p + b.impedance.x * s.q) + b.impedance.norm_sq() * s.l;
        c.record("voltage-drop", drop, || format!("branch {}", b.id));
        c.record("power-flow", s.p * s.p + s.q * s.q - vi * s.l, || format!("branch {}", b.id));
    }

    // water
    let wflow: Vec<f64> = plan.water_branches.iter().map(|b| b.flow).collect();
    let head: BTreeMap<NodeId, f64> = plan.water_nodes.iter().map(|n| (n.id, n.value)).collect();
    for (i, n) in system.water.nodes.iter().enumerate() {
        let st = &plan.water_nodes[i];
        let mut bal = 0.0;
        let mut scale: f64 = 0.0;
        for (b, br) in system.water.branches.iter().enumerate() {
            if br.to == n.id {
                bal += wflow[b];
                scale = scale.max(wflow[b].abs());
            }
            if br.from == n.id {
                bal -= wflow[b];
                scale = scale.max(wflow[b].abs());
            }
        }
        if n.reservoir.is_some() {
            bal += st.supply;
            c.record("water-bounds", (-st.supply).max(0.0), || format!("reservoir {}", n.id));
            if let Some(r) = &n.reservoir {
                c.record("water-bounds", rel(st.value - r.fixed_head, r.fixed_head), || format!("reservoir head {}", n.id));
            }
        } else {
            c.record("water-bounds", rel((n.h_min - st.value).max(0.0), n.h_min), || format!("water node {}", n.id));
        }
        for (ci, cu) in system.customers.iter().enumerate() {
            if cu.water_node == Some(n.id) {
                bal -= plan.customers[ci].water;
            }
        }
        c.record("water-balance", rel(bal, scale), || format!("water node {}", n.id));
    }
    for (ci, cu) in system.customers.iter().enumerate() {
        let w = plan.customers[ci].water;
        let cap = if cu.water_node.is_some() { cu.w_rate } else { 0.0 };
        c.record("water-bounds", rel((w - cap).max(-w).max(0.0), cap), || format!("customer {} water", cu.id));
        let g = plan.customers[ci].gas;
        let cap = if cu.gas_node.is_some() { cu.g_rate } else { 0.0 };
        c.record("gas-bounds", rel((g - cap).max(-g).max(0.0), cap), || format!("customer {} gas", cu.id));
    }
    for (b, br) in system.water.branches.iter().enumerate() {
        let st = &plan.water_branches[b];
        let w = st.flow;
        c.record("water-bounds", rel((w - br.w_max).max(-w).max(0.0), br.w_max), || format!("water branch {}", br.id));
        let (hi, hj) = (head[&br.from], head[&br.to]);
        c.record("head-difference", rel(st.drop - (hi - hj), hi.abs().max(hj.abs())), || format!("water branch {}", br.id));
        match &br.kind {
            WaterBranchKind::Pipe { f } => {
                let loss = f * (k * w).powi(2);
                c.record("darcy", rel(st.drop - loss, loss.max(st.drop.abs())), || format!("pipe {}", br.id));
            }
            WaterBranchKind::Pump { pump_id } => {
                let Some((d, pump)) = system.water.pumps.iter().enumerate().find(|(_, p)| &p.id == pump_id) else { continue };
                let dev = &plan.devices[d];
                if dev.on {
                    let gain = pump.alpha * k * w + pump.beta;
                    c.record("pump-head", rel(st.drop + gain, gain), || format!("pump {pump_id}"));
                    let f = pump_power(k * w, pump.alpha, pump.beta, pump.efficiency);
                    c.record("pump-power", rel(dev.power_kw - f, f), || format!("pump {pump_id}"));
                    c.record("pump-power", rel((dev.power_kw - dev.rated_kw).max(0.0), dev.rated_kw), || format!("pump {pump_id} rating"));
                } else {
                    c.record("pump-head", rel(w, br.w_max), || format!("idle pump {pump_id}"));
                }
            }
        }
    }

    // gas
    let gflow: Vec<f64> = plan.gas_branches.iter().map(|b| b.flow).collect();
    let psi: BTreeMap<NodeId, f64> = plan.gas_nodes.iter().map(|n| (n.id, n.value)).collect();
    for (i, n) in system.gas.nodes.iter().enumerate() {
        let st = &plan.gas_nodes[i];
        let mut bal = 0.0;
        let mut scale: f64 = 0.0;
        for (b, br) in system.gas.branches.iter().enumerate() {
            if br.to == n.id {
                bal += gflow[b];
                scale = scale.max(gflow[b].abs());
            }
            if br.from == n.id {
                bal -= gflow[b];
                scale = scale.max(gflow[b].abs());
            }
        }
        if n.source {
            bal += st.supply;
            c.record("gas-bounds", (-st.supply).max(0.0), || format!("source {}", n.id));
        }
        for (ci, cu) in system.customers.iter().enumerate() {
            if cu.gas_node == Some(n.id) {
                bal -= plan.customers[ci].gas;
            }
        }
        c.record("gas-balance", rel(bal, scale), || format!("gas node {}", n.id));
        let out = (n.psi_min - st.value).max(st.value - n.psi_max).max(0.0);
        c.record("gas-bounds", rel(out, n.psi_max), || format!("gas node {}", n.id));
    }
    for (b, br) in system.gas.branches.iter().enumerate() {
        let st = &plan.gas_branches[b];
        let g = st.flow;
        c.record("gas-bounds", rel((g - br.g_max).max(-g).max(0.0), br.g_max), || format!("gas branch {}", br.id));
        let (pi, pj) = (psi[&br.from], psi[&br.to]);
        c.record("pressure-difference", rel(st.drop - (pi - pj), pi.abs().max(pj.abs())), || format!("gas branch {}", br.id));
        match &br.kind {
            GasBranchKind::Pipe { c: coef } => {
                let d = g * g / coef;
                c.record("weymouth", rel(st.drop - d, d.max(st.drop.abs())), || format!("pipe {}", br.id));
            }
            GasBranchKind::Compressor { compressor_id } => {
                let Some((d, comp)) = system.gas.compressors.iter().enumerate().find(|(_, x)| &x.id == compressor_id) else {
                    continue;
                };
                let dev = &plan.devices[system.water.pumps.len() + d];
                if dev.on {
                    let low = (pi - pj).max(0.0);
                    let high = (pj - comp.gamma * pi).max(0.0);
                    c.record("compressor", rel(low.max(high), pi), || format!("compressor {compressor_id}"));
                    let p = compressor_power(g, comp.sigma);
                    c.record("compressor-power", rel(dev.power_kw - p, p), || format!("compressor {compressor_id}"));
                    c.record("compressor-power", rel((dev.power_kw - dev.rated_kw).max(0.0), dev.rated_kw), || {
                        format!("compressor {compressor_id} rating")
                    });
                } else {
                    c.record("compressor", rel(g, br.g_max), || format!("idle compressor {compressor_id}"));
                }
            }
        }
    }
    for (dev, kind) in plan.devices.iter().zip(
        std::iter::repeat(DeviceKind::Pump)
            .take(system.water.pumps.len())
            .chain(std::iter::repeat(DeviceKind::Compressor).take(system.gas.compressors.len())),
    ) {
        if dev.kind != kind {
            c.record("shape", f64::INFINITY, || format!("device {} out of order", dev.id));
        }
    }

    let r = exactness_gap(system, plan, unit);
    let cond = check_exactness_conditions(system, &topo.water, plan, unit);
    finish(c, r, cond, spanning)
}

fn finish(c: Collector, r: f64, conditions: ConditionFlags, spanning_tree: bool) -> FeasibilityReport {
    let families: Vec<FamilyResidual> = c
        .families
        .into_iter()
        .map(|(family, (max_residual, location, tolerance))| FamilyResidual {
            family: family.to_string(),
            max_residual,
            tolerance,
            location,
        })
        .collect();
    let pass = spanning_tree && families.iter().all(FamilyResidual::ok);
    FeasibilityReport { families, exactness_gap: r, conditions, spanning_tree, pass }
}
