//! Builders for the restoration program and the electric-only baseline.

mod bigm;
mod builder;
mod varmap;

use std::collections::{BTreeMap, BTreeSet};

pub use bigm::{derive_big_m, voltage_big_m, BigMTable, ModelBounds};
pub use builder::{GRAVITY, WATER_DENSITY};
pub use varmap::{DeviceRef, Symbol, VariableMap};

use builder::Builder;

use crate::conic::{ConicProgram, RowKind, Sense};
use crate::error::FormulationError;
use crate::network::{build_topology, validate_system, IntegratedSystem, OutageSpec, TopologyIndex};
use crate::plan::RestorationPlan;
use crate::scenario::SolverParams;

/// A built program together with everything needed to decode its solutions.
#[derive(Debug, Clone)]
pub struct Formulation {
    pub program: ConicProgram,
    pub varmap: VariableMap,
    pub big_m: BigMTable,
    pub bounds: ModelBounds,
    pub topology: TopologyIndex,
    /// Secondary objective (minimize) used to pick a tight point among optima.
    pub polish_objective: Vec<(usize, f64)>,
}

impl Formulation {
    /// Copy of the program with every binary fixed to its rounded value in
    /// `x`, the primary objective held within `slack` of `level`, and the
    /// polish objective minimized.
    pub fn polish_program(&self, x: &[f64], level: f64, slack: f64) -> ConicProgram {
        let mut p = self.program.clone();
        for &b in &p.binaries {
            let v = x[b].round().clamp(0.0, 1.0);
            p.lower[b] = v;
            p.upper[b] = v;
        }
        let sign = if p.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let terms: Vec<(usize, f64)> = p.objective.iter().map(|&(i, c)| (i, sign * c)).collect();
        let bound = sign * (level - p.objective_constant) + slack;
        p.add_row(terms, RowKind::Le, bound, "polish");
        p.sense = Sense::Minimize;
        p.objective = self.polish_objective.clone();
        p.objective_constant = 0.0;
        p
    }

    /// Binary columns in branching priority order: devices, switches, customers.
    pub fn binary_class(&self, column: usize) -> u8 {
        match self.varmap.symbol(column) {
            Some(Symbol::DeviceOn(_)) => 0,
            Some(Symbol::Switch(_)) => 1,
            Some(Symbol::Restore(_)) => 2,
            _ => 3,
        }
    }
}

fn prepare(
    system: &IntegratedSystem,
    outage: &OutageSpec,
    params: &SolverParams,
) -> Result<(TopologyIndex, ModelBounds, BigMTable), FormulationError> {
    if let Some(c) = system.customers.iter().find(|c| c.weights.a == 0.0 && c.weights.b == 0.0 && c.weights.c == 0.0) {
        return Err(FormulationError::BadWeights(c.id));
    }
    let report = validate_system(system);
    if let Some(v) = report.violations.first() {
        return Err(FormulationError::InvalidSystem(v.to_string()));
    }
    let topology = build_topology(system, outage)?;
    let bounds = ModelBounds::derive(system, &topology, params);
    let big_m = derive_big_m(system, &topology, &bounds, params.big_m)?;
    Ok((topology, bounds, big_m))
}

/// Restoration program: maximize weighted customer satisfaction minus the
/// head-loss and pressure-drop penalty over the coupled relaxed physics.
pub fn build_misocp(
    system: &IntegratedSystem,
    outage: &OutageSpec,
    params: &SolverParams,
) -> Result<Formulation, FormulationError> {
    let (topology, bounds, big_m) = prepare(system, outage, params)?;
    let mut b = Builder::new(system, &topology, &bounds, &big_m, Sense::Maximize);
    b.check_structure(outage)?;
    b.electric();
    b.customer_switches(false);
    b.devices();
    b.injections();
    b.water();
    b.gas();
    b.objective(params.lambda);
    if params.symmetry_breaking {
        b.symmetry_rows();
    }
    let polish_objective = b.polish_weights();
    let (program, varmap) = (b.program, b.varmap);
    Ok(Formulation { program, varmap, big_m, bounds, topology, polish_objective })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineVariant {
    /// Σ ω·P over devices.
    Power,
    /// Σ ω·χ with devices fully on or off.
    Count,
    /// Σ ω·P/P_rated.
    Percent,
}

impl std::str::FromStr for BaselineVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "power" => Ok(BaselineVariant::Power),
            "count" => Ok(BaselineVariant::Count),
            "percent" => Ok(BaselineVariant::Percent),
            other => Err(format!("unknown baseline variant `{other}`")),
        }
    }
}

/// Priority of each pump or compressor, by device id.
pub type DeviceWeights = BTreeMap<String, f64>;

/// Electric-only restoration: pumps and compressors are plain loads up to
/// their rating, customers count by priority, water and gas are ignored.
pub fn build_baseline_clr(
    system: &IntegratedSystem,
    outage: &OutageSpec,
    params: &SolverParams,
    weights: &DeviceWeights,
    variant: BaselineVariant,
) -> Result<Formulation, FormulationError> {
    let (topology, bounds, big_m) = prepare(system, outage, params)?;
    let mut devices: Vec<(DeviceRef, &str, f64)> = Vec::new();
    devices.extend(system.water.pumps.iter().enumerate().map(|(d, p)| (DeviceRef::Pump(d), p.id.as_str(), p.rated_power_kw)));
    devices.extend(
        system.gas.compressors.iter().enumerate().map(|(d, c)| (DeviceRef::Compressor(d), c.id.as_str(), c.rated_power_kw)),
    );
    let known: BTreeSet<&str> = devices.iter().map(|d| d.1).collect();
    if let Some(extra) = weights.keys().find(|k| !known.contains(k.as_str())) {
        return Err(FormulationError::BaselineWeights(format!("unknown device `{extra}`")));
    }
    for &(_, id, _) in &devices {
        match weights.get(id) {
            None => return Err(FormulationError::BaselineWeights(format!("no weight for device `{id}`"))),
            Some(w) if !w.is_finite() || *w < 0.0 => {
                return Err(FormulationError::BaselineWeights(format!("weight of `{id}` must be finite and nonnegative")))
            }
            _ => {}
        }
    }

    let mut b = Builder::new(system, &topology, &bounds, &big_m, Sense::Maximize);
    b.check_structure(outage)?;
    b.electric();
    b.customer_switches(true);
    b.devices();
    b.injections();
    for &(dev, id, rated) in &devices {
        let w = weights[id];
        let chi = b.col(Symbol::DeviceOn(dev));
        let p = b.col(Symbol::DevicePower(dev));
        let y = b.col(Symbol::DeviceProduct(dev));
        match variant {
            BaselineVariant::Power => b.program.add_objective(y, w),
            BaselineVariant::Percent => b.program.add_objective(y, w / rated),
            BaselineVariant::Count => {
                b.program.add_row(vec![(p, 1.0), (chi, -rated)], RowKind::Eq, 0.0, "count");
                b.program.add_objective(chi, w);
            }
        }
    }
    for c in &system.customers {
        if let Some(r) = b.varmap.get(Symbol::Restore(c.id)) {
            b.program.add_objective(r, c.priority);
        }
    }
    let polish_objective = b.polish_weights();
    let (program, varmap) = (b.program, b.varmap);
    Ok(Formulation { program, varmap, big_m, bounds, topology, polish_objective })
}

/// Constraint ids every restoration program over a system with all element
/// kinds must cite at least once.
pub const REQUIRED_TAGS: &[&str] = &[
    "5", "6", "7", "8", "9", "11", "12", "13", "14", "15", "16", "17", "18", "19", "22", "23", "24", "25", "26", "29",
    "30", "32", "35", "36", "38", "39", "40", "41", "42", "43", "44", "46", "epigraph", "product",
];

/// Required ids absent from `program`. The penalty terms live in the
/// objective and are reported as `penalty` when no pipe loss is penalized.
pub fn coverage_gaps(form: &Formulation) -> Vec<String> {
    let tags = form.program.tags();
    let mut missing: Vec<String> = REQUIRED_TAGS.iter().filter(|t| !tags.contains(**t)).map(|t| t.to_string()).collect();
    let penalized = form.program.objective.iter().any(|&(i, c)| {
        c < 0.0 && matches!(form.varmap.symbol(i), Some(Symbol::HeadLoss(_)) | Some(Symbol::PressureDrop(_)))
    });
    if !penalized {
        missing.push("penalty".into());
    }
    missing
}

/// Weighted satisfaction minus the penalty, computed directly from a plan.
pub fn evaluate_objective(plan: &RestorationPlan, system: &IntegratedSystem, lambda: f64) -> f64 {
    customer_term(plan, system) - lambda * (plan.head_loss_sum() + plan.pressure_drop_sum())
}

/// Σ ω_i · min over attached ratios.
pub fn customer_term(plan: &RestorationPlan, system: &IntegratedSystem) -> f64 {
    system
        .customers
        .iter()
        .filter_map(|c| {
            let state = plan.customers.iter().find(|s| s.id == c.id)?;
            let mut m = f64::INFINITY;
            if c.has_electric_term() {
                m = m.min(if state.restored { 1.0 } else { 0.0 } / c.weights.a);
            }
            if c.has_water_term() {
                m = m.min(state.water / c.w_rate / c.weights.b);
            }
            if c.has_gas_term() {
                m = m.min(state.gas / c.g_rate / c.weights.c);
            }
            m.is_finite().then_some(c.priority * m)
        })
        .sum()
}
