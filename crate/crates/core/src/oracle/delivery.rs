use super::verify::{verify_plan, FeasibilityReport, Tolerances};
use crate::bnb::polish;
use crate::conic::{solve_socp, RowKind, Sense, SolveSettings, SolveStatus};
use crate::error::OracleError;
use crate::formulation::{build_misocp, evaluate_objective, DeviceRef, Formulation, Symbol};
use crate::network::{IntegratedSystem, OutageSpec};
use crate::plan::{DeviceKind, RestorationPlan};
use crate::scenario::SolverParams;

#[derive(Debug, Clone)]
pub struct DeliveryOutcome {
    /// Coupled state under the allocation; `None` when it admits none.
    pub plan: Option<RestorationPlan>,
    pub report: Option<FeasibilityReport>,
    /// Restoration objective of `plan`, 0 without one.
    pub objective: f64,
}

/// Water and gas that an electric allocation can actually deliver: the
/// switching, customer pickup and device states of `allocation` are fixed,
/// each device may draw at most its allocated power, and the coupled
/// restoration program is re-solved. Among its optima the point serving the
/// most water and gas (as fractions of demand) is kept, then polished.
pub fn evaluate_delivery(
    system: &IntegratedSystem,
    outage: &OutageSpec,
    params: &SolverParams,
    allocation: &RestorationPlan,
) -> Result<DeliveryOutcome, OracleError> {
    let mut form = build_misocp(system, outage, params)?;
    let mut fixed = Vec::new();
    for (k, st) in allocation.branches.iter().enumerate() {
        if let Some(col) = form.varmap.get(Symbol::Switch(k)) {
            if form.program.is_binary(col) {
                fixed.push((col, if st.closed { 1.0 } else { 0.0 }));
            }
        }
    }
    for st in &allocation.customers {
        if let Some(col) = form.varmap.get(Symbol::Restore(st.id)) {
            fixed.push((col, if st.restored { 1.0 } else { 0.0 }));
        }
    }
    let (mut pumps, mut comps) = (0usize, 0usize);
    for st in &allocation.devices {
        let dev = match st.kind {
            DeviceKind::Pump => {
                pumps += 1;
                DeviceRef::Pump(pumps - 1)
            }
            DeviceKind::Compressor => {
                comps += 1;
                DeviceRef::Compressor(comps - 1)
            }
        };
        if let Some(col) = form.varmap.get(Symbol::DeviceOn(dev)) {
            if form.program.is_binary(col) {
                fixed.push((col, if st.on { 1.0 } else { 0.0 }));
            }
        }
        if let Some(col) = form.varmap.get(Symbol::DevicePower(dev)) {
            let cap = if st.on { st.power_kw.max(0.0) } else { 0.0 };
            form.program.upper[col] = form.program.upper[col].min(cap * (1.0 + 1e-9) + 1e-9);
        }
    }
    let settings = SolveSettings { feas_tol: params.feas_tol, gap_tol: params.gap_tol, ..SolveSettings::default() };
    let sol = solve_socp(&form.program, &fixed, &settings)?;
    if sol.status != SolveStatus::Optimal {
        return Ok(DeliveryOutcome { plan: None, report: None, objective: 0.0 });
    }
    let mut x = sol.x.clone();
    for &(col, v) in &fixed {
        x[col] = v;
    }
    let x = max_supply(&form, system, &x, sol.objective, &settings).unwrap_or(x);
    let mut plan = RestorationPlan::decode(system, &form, &x, sol.objective);
    plan.objective = evaluate_objective(&plan, system, params.lambda);
    let report = verify_plan(system, outage, &plan, &Tolerances::default(), params.pump_flow_unit);
    Ok(DeliveryOutcome { objective: plan.objective, plan: Some(plan), report: Some(report) })
}

fn max_supply(
    form: &Formulation,
    system: &IntegratedSystem,
    x: &[f64],
    level: f64,
    settings: &SolveSettings,
) -> Option<Vec<f64>> {
    let mut held = form.clone();
    let p = &mut held.program;
    for &b in &p.binaries.clone() {
        let v = x[b].round().clamp(0.0, 1.0);
        p.lower[b] = v;
        p.upper[b] = v;
    }
    let sign = if p.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let terms: Vec<(usize, f64)> = p.objective.iter().map(|&(i, c)| (i, sign * c)).collect();
    p.add_row(terms, RowKind::Le, sign * (level - p.objective_constant) + 1e-7 * level.abs().max(1.0), "polish");
    let mut supply = Vec::new();
    for c in &system.customers {
        if let Some(w) = form.varmap.get(Symbol::WaterServed(c.id)) {
            supply.push((w, 1.0 / c.w_rate.max(1e-9)));
        }
        if let Some(g) = form.varmap.get(Symbol::GasServed(c.id)) {
            supply.push((g, 1.0 / c.g_rate.max(1e-9)));
        }
    }
    if supply.is_empty() {
        return polish(form, x, level, settings);
    }
    p.sense = Sense::Maximize;
    p.objective = supply;
    p.objective_constant = 0.0;
    let sol = solve_socp(p, &[], settings).ok()?;
    if sol.status != SolveStatus::Optimal {
        return polish(form, x, level, settings);
    }
    polish(&held, &sol.x, sol.objective, settings).or(Some(sol.x))
}
