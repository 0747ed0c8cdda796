use std::collections::BTreeMap;

use super::bigm::{BigMTable, ModelBounds};
use super::varmap::{DeviceRef, Symbol, VariableMap};
use crate::conic::{AffineExpr, ConeKind, ConicProgram, RowKind, Sense};
use crate::network::{
    BranchStatus, DisjointSet, GasBranchKind, IntegratedSystem, OutageSpec, TopologyIndex,
    WaterBranchKind,
};
use crate::error::FormulationError;

pub const WATER_DENSITY: f64 = 1000.0;
pub const GRAVITY: f64 = 9.8;

/// Shared column and row emitter for the restoration and baseline programs.
pub(crate) struct Builder<'a> {
    pub sys: &'a IntegratedSystem,
    pub topo: &'a TopologyIndex,
    pub bounds: &'a ModelBounds,
    pub big_m: &'a BigMTable,
    pub program: ConicProgram,
    pub varmap: VariableMap,
}

impl<'a> Builder<'a> {
    pub fn new(
        sys: &'a IntegratedSystem,
        topo: &'a TopologyIndex,
        bounds: &'a ModelBounds,
        big_m: &'a BigMTable,
        sense: Sense,
    ) -> Self {
        Builder { sys, topo, bounds, big_m, program: ConicProgram::new(sense), varmap: VariableMap::default() }
    }

    fn var(&mut self, sym: Symbol, name: String, lo: f64, hi: f64, tag: &str) -> usize {
        let idx = self.program.add_tagged_var(name, lo, hi, tag);
        self.varmap.insert(sym, idx);
        idx
    }

    fn binary(&mut self, sym: Symbol, name: String) -> usize {
        let idx = self.program.add_binary(name);
        self.varmap.insert(sym, idx);
        idx
    }

    pub fn col(&self, sym: Symbol) -> usize {
        self.varmap.get(sym).unwrap_or_else(|| panic!("no column for {sym:?}"))
    }

    fn opt(&self, sym: Symbol) -> Option<usize> {
        self.varmap.get(sym)
    }

    fn sbase(&self) -> f64 {
        self.sys.base.kva
    }

    fn in_component(&self, node: u32) -> bool {
        self.topo.electric.node_index.get(&node).is_some_and(|&i| self.topo.electric.in_component[i])
    }

    /// Closed-fixed branches must all be energizable and acyclic.
    pub fn check_structure(&self, outage: &OutageSpec) -> Result<(), FormulationError> {
        let el = &self.topo.electric;
        let mut dsu = DisjointSet::new(el.node_ids.len());
        for (k, b) in self.sys.electric.branches.iter().enumerate() {
            if b.status != BranchStatus::ClosedFixed || outage.is_damaged(b) {
                continue;
            }
            if !el.usable[k] {
                return Err(FormulationError::InfeasibleStructure(b.id.clone()));
            }
            if !dsu.union(el.node_index[&b.from], el.node_index[&b.to]) {
                return Err(FormulationError::InfeasibleStructure(format!("{} closes a loop of fixed branches", b.id)));
            }
        }
        Ok(())
    }

    /// Branch, node and DG columns of the root component with the balance,
    /// voltage-drop, capacity and radiality rows and the branch cone.
    /// Injections are added separately.
    pub fn electric(&mut self) {
        let sys = self.sys;
        let el = &self.topo.electric;
        for (k, b) in sys.electric.branches.iter().enumerate() {
            if !el.usable[k] {
                continue;
            }
            match b.status {
                BranchStatus::Switchable => self.binary(Symbol::Switch(k), format!("a[{}]", b.id)),
                _ => self.var(Symbol::Switch(k), format!("a[{}]", b.id), 1.0, 1.0, "14"),
            };
            let mf = self.big_m.fict;
            self.var(Symbol::FictFlow(k), format!("F[{}]", b.id), -mf, mf, "16");
            let s_bound = (self.bounds.v_max * b.l_max).sqrt();
            self.var(Symbol::BranchP(k), format!("P[{}]", b.id), -s_bound, s_bound, "35");
            self.var(Symbol::BranchQ(k), format!("Q[{}]", b.id), -s_bound, s_bound, "35");
            self.var(Symbol::BranchL(k), format!("l[{}]", b.id), 0.0, b.l_max, "13");
        }
        for (i, n) in sys.electric.nodes.iter().enumerate() {
            if !el.in_component[i] {
                continue;
            }
            self.var(Symbol::Voltage(n.id), format!("v[{}]", n.id), n.v_min_sq, n.v_max_sq, "12");
            self.var(Symbol::InjP(n.id), format!("p[{}]", n.id), f64::NEG_INFINITY, f64::INFINITY, "");
            self.var(Symbol::InjQ(n.id), format!("q[{}]", n.id), f64::NEG_INFINITY, f64::INFINITY, "");
        }
        for (d, dg) in sys.electric.dgs.iter().enumerate() {
            if !self.in_component(dg.node) {
                continue;
            }
            let cap = dg.capacity_kva / self.sbase();
            let p = self.var(Symbol::DgP(d), format!("Pdg[{}]", dg.node), 0.0, cap, "11");
            let q = self.var(Symbol::DgQ(d), format!("Qdg[{}]", dg.node), -cap, cap, "11");
            self.program.add_cone(
                ConeKind::SecondOrder,
                vec![AffineExpr::constant(cap), AffineExpr::var(p), AffineExpr::var(q)],
                "11",
            );
        }

        // balance
        for (i, n) in sys.electric.nodes.iter().enumerate() {
            if !el.in_component[i] {
                continue;
            }
            let mut p_terms = vec![(self.col(Symbol::InjP(n.id)), 1.0)];
            let mut q_terms = vec![(self.col(Symbol::InjQ(n.id)), 1.0)];
            for &k in &el.incident[i] {
                if !el.usable[k] {
                    continue;
                }
                let b = &sys.electric.branches[k];
                let (pc, qc, lc) =
                    (self.col(Symbol::BranchP(k)), self.col(Symbol::BranchQ(k)), self.col(Symbol::BranchL(k)));
                if b.to == n.id {
                    p_terms.extend([(pc, 1.0), (lc, -b.impedance.r)]);
                    q_terms.extend([(qc, 1.0), (lc, -b.impedance.x)]);
                } else {
                    p_terms.push((pc, -1.0));
                    q_terms.push((qc, -1.0));
                }
            }
            self.program.add_row(p_terms, RowKind::Eq, 0.0, "5");
            self.program.add_row(q_terms, RowKind::Eq, 0.0, "5");
        }

        for (k, b) in sys.electric.branches.iter().enumerate() {
            if !el.usable[k] {
                continue;
            }
            let a = self.col(Symbol::Switch(k));
            let (p, q, l) = (self.col(Symbol::BranchP(k)), self.col(Symbol::BranchQ(k)), self.col(Symbol::BranchL(k)));
            let (vi, vj) = (self.col(Symbol::Voltage(b.from)), self.col(Symbol::Voltage(b.to)));
            let (r, x, z2) = (b.impedance.r, b.impedance.x, b.impedance.norm_sq());
            let m = self.big_m.volt[&b.id];
            // v_i − v_j − 2(rP + xQ) + |z|² l within ±M(1 − a)
            let drop = [(vi, 1.0), (vj, -1.0), (p, -2.0 * r), (q, -2.0 * x), (l, z2)];
            let mut upper: Vec<(usize, f64)> = drop.to_vec();
            upper.push((a, m));
            self.program.add_row(upper, RowKind::Le, m, "8");
            let mut lower: Vec<(usize, f64)> = drop.iter().map(|&(i, c)| (i, -c)).collect();
            lower.push((a, m));
            self.program.add_row(lower, RowKind::Le, m, "9");

            self.program.add_row(vec![(l, 1.0), (a, -b.l_max)], RowKind::Le, 0.0, "13");
            let s_bound = (self.bounds.v_max * b.l_max).sqrt();
            for col in [p, q] {
                self.program.add_row(vec![(col, 1.0), (a, -s_bound)], RowKind::Le, 0.0, "35");
                self.program.add_row(vec![(col, -1.0), (a, -s_bound)], RowKind::Le, 0.0, "35");
            }
            self.program.add_cone(
                ConeKind::Rotated,
                vec![AffineExpr::scaled(vi, 0.5), AffineExpr::var(l), AffineExpr::var(p), AffineExpr::var(q)],
                "35",
            );
        }

        // radiality
        let switch_terms: Vec<(usize, f64)> = (0..sys.electric.branches.len())
            .filter(|&k| el.usable[k])
            .map(|k| (self.col(Symbol::Switch(k)), 1.0))
            .collect();
        let size = el.component_size();
        self.program.add_row(switch_terms, RowKind::Eq, size as f64 - 1.0, "14");
        for (i, n) in sys.electric.nodes.iter().enumerate() {
            if !el.in_component[i] || i == el.root {
                continue;
            }
            let mut terms = Vec::new();
            for &k in &el.incident[i] {
                if !el.usable[k] {
                    continue;
                }
                let sign = if sys.electric.branches[k].to == n.id { 1.0 } else { -1.0 };
                terms.push((self.col(Symbol::FictFlow(k)), sign));
            }
            self.program.add_row(terms, RowKind::Eq, self.bounds.fictitious_demand, "15");
        }
        for k in 0..sys.electric.branches.len() {
            if !el.usable[k] {
                continue;
            }
            let (f, a) = (self.col(Symbol::FictFlow(k)), self.col(Symbol::Switch(k)));
            let m = self.big_m.fict;
            self.program.add_row(vec![(f, 1.0), (a, -m)], RowKind::Le, 0.0, "16");
            self.program.add_row(vec![(f, -1.0), (a, -m)], RowKind::Le, 0.0, "16");
        }
    }

    /// Restoration binaries for customers whose electric node is energizable.
    /// `all_loads` also covers customers without an electric objective term.
    pub fn customer_switches(&mut self, all_loads: bool) {
        for c in &self.sys.customers {
            let Some(node) = c.electric_node else { continue };
            if !self.in_component(node) || !(all_loads || c.has_electric_term()) {
                continue;
            }
            self.binary(Symbol::Restore(c.id), format!("r[{}]", c.id));
        }
    }

    /// Device status, power and product columns with the exact product rows.
    pub fn devices(&mut self) {
        let sys = self.sys;
        let mut list: Vec<(DeviceRef, String, u32, f64)> = Vec::new();
        for (d, p) in sys.water.pumps.iter().enumerate() {
            list.push((DeviceRef::Pump(d), p.id.clone(), p.electric_node, p.rated_power_kw));
        }
        for (d, c) in sys.gas.compressors.iter().enumerate() {
            list.push((DeviceRef::Compressor(d), c.id.clone(), c.electric_node, c.rated_power_kw));
        }
        for (dev, id, node, rated) in list {
            let chi = if self.in_component(node) {
                self.binary(Symbol::DeviceOn(dev), format!("chi[{id}]"))
            } else {
                self.var(Symbol::DeviceOn(dev), format!("chi[{id}]"), 0.0, 0.0, "product")
            };
            let p = self.var(Symbol::DevicePower(dev), format!("Pdev[{id}]"), 0.0, rated, "product");
            let y = self.var(Symbol::DeviceProduct(dev), format!("y[{id}]"), 0.0, rated, "product");
            self.program.add_row(vec![(y, 1.0), (chi, -rated)], RowKind::Le, 0.0, "product");
            self.program.add_row(vec![(p, 1.0), (y, -1.0), (chi, rated)], RowKind::Le, rated, "product");
            self.program.add_row(vec![(y, 1.0), (p, -1.0)], RowKind::Le, 0.0, "product");
        }
    }

    /// Node injection rows: DG output minus restored customer load minus
    /// device draw, in per-unit.
    pub fn injections(&mut self) {
        let sys = self.sys;
        let sb = self.sbase();
        let mut p_terms: BTreeMap<u32, Vec<(usize, f64)>> = BTreeMap::new();
        let mut q_terms: BTreeMap<u32, Vec<(usize, f64)>> = BTreeMap::new();
        let mut tags: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
        for n in &sys.electric.nodes {
            if self.in_component(n.id) {
                p_terms.insert(n.id, vec![(self.col(Symbol::InjP(n.id)), 1.0)]);
                q_terms.insert(n.id, vec![(self.col(Symbol::InjQ(n.id)), 1.0)]);
                tags.insert(n.id, Vec::new());
            }
        }
        for (d, dg) in sys.electric.dgs.iter().enumerate() {
            if let (Some(p), Some(q)) = (self.opt(Symbol::DgP(d)), self.opt(Symbol::DgQ(d))) {
                p_terms.get_mut(&dg.node).unwrap().push((p, -1.0));
                q_terms.get_mut(&dg.node).unwrap().push((q, -1.0));
                tags.get_mut(&dg.node).unwrap().push("6");
            }
        }
        for c in &sys.customers {
            let (Some(node), Some(r)) = (c.electric_node, self.opt(Symbol::Restore(c.id))) else { continue };
            p_terms.get_mut(&node).unwrap().push((r, c.s_rate.p_kw / sb));
            q_terms.get_mut(&node).unwrap().push((r, c.s_rate.reactive_kvar() / sb));
            tags.get_mut(&node).unwrap().push("7");
        }
        let mut devices: Vec<(DeviceRef, u32, f64)> = Vec::new();
        for (d, p) in sys.water.pumps.iter().enumerate() {
            devices.push((DeviceRef::Pump(d), p.electric_node, p.phi));
        }
        for (d, c) in sys.gas.compressors.iter().enumerate() {
            devices.push((DeviceRef::Compressor(d), c.electric_node, c.phi));
        }
        for (dev, node, phi) in devices {
            if !self.in_component(node) {
                continue;
            }
            let y = self.col(Symbol::DeviceProduct(dev));
            p_terms.get_mut(&node).unwrap().push((y, 1.0 / sb));
            q_terms.get_mut(&node).unwrap().push((y, phi / sb));
            tags.get_mut(&node).unwrap().push("product");
        }
        for (node, terms) in p_terms {
            let mut t = tags.remove(&node).unwrap_or_default();
            if t.is_empty() {
                t.push("7");
            }
            t.dedup();
            let tag = t.join(",");
            self.program.add_row(terms, RowKind::Eq, 0.0, &tag);
            self.program.add_row(q_terms.remove(&node).unwrap(), RowKind::Eq, 0.0, &tag);
        }
    }

    /// Water columns, balance, bound, head and pump rows, the Darcy cone and
    /// the pump power cone.
    pub fn water(&mut self) {
        let sys = self.sys;
        let k = self.bounds.flow_scale;
        for (b, br) in sys.water.branches.iter().enumerate() {
            self.var(Symbol::WaterFlow(b), format!("W[{}]", br.id), 0.0, br.w_max, "22");
            self.var(Symbol::HeadLoss(b), format!("dh[{}]", br.id), f64::NEG_INFINITY, f64::INFINITY, "");
        }
        for (i, n) in sys.water.nodes.iter().enumerate() {
            let (lo, hi) = (self.bounds.head_lo[i], self.bounds.head_hi[i]);
            self.var(Symbol::Head(n.id), format!("h[{}]", n.id), lo, hi, "23");
            if n.reservoir.is_some() {
                let cap: f64 = sys.water.branches.iter().filter(|b| b.from == n.id).map(|b| b.w_max).sum();
                self.var(Symbol::ReservoirOut(n.id), format!("wr[{}]", n.id), 0.0, cap, "17");
            }
        }
        for c in &sys.customers {
            if c.has_water_term() {
                self.var(Symbol::WaterServed(c.id), format!("w[{}]", c.id), 0.0, c.w_rate, "18");
            }
        }
        for n in &sys.water.nodes {
            let mut terms = Vec::new();
            for (b, br) in sys.water.branches.iter().enumerate() {
                if br.to == n.id {
                    terms.push((self.col(Symbol::WaterFlow(b)), 1.0));
                }
                if br.from == n.id {
                    terms.push((self.col(Symbol::WaterFlow(b)), -1.0));
                }
            }
            if let Some(wr) = self.opt(Symbol::ReservoirOut(n.id)) {
                terms.push((wr, 1.0));
            }
            for c in &sys.customers {
                if c.water_node == Some(n.id) {
                    if let Some(w) = self.opt(Symbol::WaterServed(c.id)) {
                        terms.push((w, -1.0));
                    }
                }
            }
            self.program.add_row(terms, RowKind::Eq, 0.0, "17");
        }
        for (b, br) in sys.water.branches.iter().enumerate() {
            let w = self.col(Symbol::WaterFlow(b));
            let dh = self.col(Symbol::HeadLoss(b));
            let (hi, hj) = (self.col(Symbol::Head(br.from)), self.col(Symbol::Head(br.to)));
            self.program.add_row(vec![(dh, 1.0), (hi, -1.0), (hj, 1.0)], RowKind::Eq, 0.0, "19");
            match &br.kind {
                WaterBranchKind::Pipe { f } => {
                    self.program.add_quadratic_le(AffineExpr::var(dh), vec![(w, f.sqrt() * k)], "36");
                }
                WaterBranchKind::Pump { pump_id } => {
                    let d = sys.water.pumps.iter().position(|p| &p.id == pump_id).expect("validated pump reference");
                    let pump = &sys.water.pumps[d];
                    let dev = DeviceRef::Pump(d);
                    let chi = self.col(Symbol::DeviceOn(dev));
                    let power = self.col(Symbol::DevicePower(dev));
                    let mh = self.big_m.pump_head[&pump.id];
                    let mw = self.big_m.pump_flow[&pump.id];
                    let a = pump.alpha * k;
                    // Δh = −(αW + β) when on
                    self.program.add_row(vec![(dh, -1.0), (w, -a), (chi, mh)], RowKind::Le, mh + pump.beta, "38");
                    self.program.add_row(vec![(dh, 1.0), (w, a), (chi, mh)], RowKind::Le, mh - pump.beta, "39");
                    self.program.add_row(vec![(w, 1.0), (chi, -mw)], RowKind::Le, 0.0, "40");
                    let kk = WATER_DENSITY * GRAVITY / pump.efficiency / 1000.0;
                    let quad = (kk * pump.alpha).sqrt() * k;
                    let lin = kk * pump.beta * k;
                    let lhs = AffineExpr::linear(vec![(power, 1.0), (w, -lin)]);
                    self.program.add_quadratic_le(lhs, vec![(w, quad)], "46");
                }
            }
        }
    }

    /// Gas columns, balance, bound, pressure and compressor rows and the
    /// Weymouth cone.
    pub fn gas(&mut self) {
        let sys = self.sys;
        for (b, br) in sys.gas.branches.iter().enumerate() {
            self.var(Symbol::GasFlow(b), format!("G[{}]", br.id), 0.0, br.g_max, "29");
            if matches!(br.kind, GasBranchKind::Pipe { .. }) {
                self.var(Symbol::PressureDrop(b), format!("dpsi[{}]", br.id), f64::NEG_INFINITY, f64::INFINITY, "");
            }
        }
        for n in &sys.gas.nodes {
            self.var(Symbol::Pressure(n.id), format!("psi[{}]", n.id), n.psi_min, n.psi_max, "30");
            if n.source {
                let cap: f64 = sys.gas.branches.iter().filter(|b| b.from == n.id).map(|b| b.g_max).sum();
                self.var(Symbol::SourceOut(n.id), format!("gs[{}]", n.id), 0.0, cap, "24");
            }
        }
        for c in &sys.customers {
            if c.has_gas_term() {
                self.var(Symbol::GasServed(c.id), format!("g[{}]", c.id), 0.0, c.g_rate, "25");
            }
        }
        for n in &sys.gas.nodes {
            let mut terms = Vec::new();
            for (b, br) in sys.gas.branches.iter().enumerate() {
                if br.to == n.id {
                    terms.push((self.col(Symbol::GasFlow(b)), 1.0));
                }
                if br.from == n.id {
                    terms.push((self.col(Symbol::GasFlow(b)), -1.0));
                }
            }
            if let Some(gs) = self.opt(Symbol::SourceOut(n.id)) {
                terms.push((gs, 1.0));
            }
            for c in &sys.customers {
                if c.gas_node == Some(n.id) {
                    if let Some(g) = self.opt(Symbol::GasServed(c.id)) {
                        terms.push((g, -1.0));
                    }
                }
            }
            self.program.add_row(terms, RowKind::Eq, 0.0, "24");
        }
        for (b, br) in sys.gas.branches.iter().enumerate() {
            let g = self.col(Symbol::GasFlow(b));
            let (pi, pj) = (self.col(Symbol::Pressure(br.from)), self.col(Symbol::Pressure(br.to)));
            match &br.kind {
                GasBranchKind::Pipe { c } => {
                    let dp = self.col(Symbol::PressureDrop(b));
                    self.program.add_row(vec![(dp, 1.0), (pi, -1.0), (pj, 1.0)], RowKind::Eq, 0.0, "26");
                    self.program.add_quadratic_le(AffineExpr::var(dp), vec![(g, 1.0 / c.sqrt())], "41");
                }
                GasBranchKind::Compressor { compressor_id } => {
                    let d = sys
                        .gas
                        .compressors
                        .iter()
                        .position(|c| &c.id == compressor_id)
                        .expect("validated compressor reference");
                    let comp = &sys.gas.compressors[d];
                    let dev = DeviceRef::Compressor(d);
                    let chi = self.col(Symbol::DeviceOn(dev));
                    let power = self.col(Symbol::DevicePower(dev));
                    let mp = self.big_m.gas_press[&comp.id];
                    let mg = self.big_m.gas_flow[&comp.id];
                    self.program.add_row(vec![(pi, 1.0), (pj, -1.0), (chi, mp)], RowKind::Le, mp, "42");
                    self.program.add_row(vec![(pj, 1.0), (pi, -comp.gamma), (chi, mp)], RowKind::Le, mp, "43");
                    self.program.add_row(vec![(g, 1.0), (chi, -mg)], RowKind::Le, 0.0, "44");
                    self.program.add_row(vec![(power, 1.0), (g, -comp.sigma)], RowKind::Eq, 0.0, "32");
                }
            }
        }
    }

    /// Epigraph columns `t_i` with their rows and the restoration objective.
    pub fn objective(&mut self, lambda: f64) {
        let sys = self.sys;
        for c in &sys.customers {
            let w = c.weights;
            let mut cap = f64::INFINITY;
            let mut rows: Vec<(usize, f64)> = Vec::new();
            let mut dead = false;
            if c.has_electric_term() {
                cap = cap.min(1.0 / w.a);
                match self.opt(Symbol::Restore(c.id)) {
                    Some(r) => rows.push((r, 1.0 / w.a)),
                    None => dead = true,
                }
            }
            if c.has_water_term() {
                cap = cap.min(1.0 / w.b);
                rows.push((self.col(Symbol::WaterServed(c.id)), 1.0 / (w.b * c.w_rate)));
            }
            if c.has_gas_term() {
                cap = cap.min(1.0 / w.c);
                rows.push((self.col(Symbol::GasServed(c.id)), 1.0 / (w.c * c.g_rate)));
            }
            if !cap.is_finite() {
                continue;
            }
            let hi = if dead { 0.0 } else { cap };
            let t = self.var(Symbol::Epigraph(c.id), format!("t[{}]", c.id), 0.0, hi, "epigraph");
            for (col, coef) in rows {
                self.program.add_row(vec![(t, 1.0), (col, -coef)], RowKind::Le, 0.0, "epigraph");
            }
            self.program.add_objective(t, c.priority);
        }
        if lambda != 0.0 {
            for (b, br) in sys.water.branches.iter().enumerate() {
                if matches!(br.kind, WaterBranchKind::Pipe { .. }) {
                    self.program.add_objective(self.col(Symbol::HeadLoss(b)), -lambda);
                }
            }
            for b in 0..sys.gas.branches.len() {
                if let Some(dp) = self.opt(Symbol::PressureDrop(b)) {
                    self.program.add_objective(dp, -lambda);
                }
            }
        }
    }

    /// `r_j ≤ r_i` for customers that are interchangeable in every network.
    pub fn symmetry_rows(&mut self) {
        let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for c in &self.sys.customers {
            let Some(r) = self.opt(Symbol::Restore(c.id)) else { continue };
            let key = format!(
                "{:?}|{:?}|{:?}|{}|{}|{}|{}|{}|{}|{}|{}",
                c.electric_node,
                c.water_node,
                c.gas_node,
                c.priority,
                c.weights.a,
                c.weights.b,
                c.weights.c,
                c.s_rate.p_kw,
                c.s_rate.reactive_kvar(),
                c.w_rate,
                c.g_rate
            );
            groups.entry(key).or_default().push(r);
        }
        for cols in groups.values() {
            for pair in cols.windows(2) {
                self.program.add_row(vec![(pair[1], 1.0), (pair[0], -1.0)], RowKind::Le, 0.0, "symmetry");
            }
        }
    }

    /// Weights of the secondary objective that selects, among optima, the
    /// point where every relaxed quadratic holds with equality.
    pub fn polish_weights(&self) -> Vec<(usize, f64)> {
        let sys = self.sys;
        let mut out = Vec::new();
        for (k, b) in sys.electric.branches.iter().enumerate() {
            if let Some(l) = self.opt(Symbol::BranchL(k)) {
                out.push((l, (b.impedance.r.abs() + b.impedance.x.abs()).max(1e-6)));
            }
        }
        for d in 0..sys.water.pumps.len() {
            out.push((self.col(Symbol::DevicePower(DeviceRef::Pump(d))), 1.0 / self.sbase()));
        }
        for d in 0..sys.gas.compressors.len() {
            out.push((self.col(Symbol::DevicePower(DeviceRef::Compressor(d))), 1.0 / self.sbase()));
        }
        for b in 0..sys.water.branches.len() {
            if let Some(dh) = self.opt(Symbol::HeadLoss(b)) {
                if matches!(sys.water.branches[b].kind, WaterBranchKind::Pipe { .. }) {
                    out.push((dh, 1e-3));
                }
            }
        }
        for b in 0..sys.gas.branches.len() {
            if let Some(dp) = self.opt(Symbol::PressureDrop(b)) {
                out.push((dp, 1e-3));
            }
        }
        out
    }
}
