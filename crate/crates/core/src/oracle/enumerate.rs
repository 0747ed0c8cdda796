use std::collections::BTreeMap;

use super::verify::{verify_plan, FeasibilityReport, Tolerances};
use crate::bnb::polish;
use crate::conic::{solve_socp, SolveSettings, SolveStatus};
use crate::error::OracleError;
use crate::formulation::{build_misocp, Formulation, Symbol};
use crate::network::{is_spanning_tree, IntegratedSystem, OutageSpec};
use crate::plan::RestorationPlan;
use crate::scenario::SolverParams;

pub const DEFAULT_BINARY_LIMIT: usize = 14;

/// One binary assignment and its conic optimum, if feasible.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Values of the enumerated binaries, in `Enumeration::columns` order.
    pub values: Vec<u8>,
    pub objective: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    pub columns: Vec<usize>,
    /// Feasible assignments by decreasing objective, then infeasible ones.
    pub ranking: Vec<Assignment>,
    /// Best conic objective over all assignments.
    pub best_objective: Option<f64>,
    /// Highest-ranked assignment whose polished plan passes verification.
    pub best_verified: Option<(RestorationPlan, FeasibilityReport)>,
    /// Assignments skipped because their switch set is not a spanning tree.
    pub skipped: usize,
}

/// Brute-force optimum of the restoration program.
pub fn enumerate_optimal(
    system: &IntegratedSystem,
    outage: &OutageSpec,
    params: &SolverParams,
    binary_limit: usize,
) -> Result<Enumeration, OracleError> {
    let form = build_misocp(system, outage, params)?;
    enumerate_program(&form, system, outage, params, &[], binary_limit)
}

/// Enumerates the free binaries of `form` not listed in `fixed`.
pub fn enumerate_program(
    form: &Formulation,
    system: &IntegratedSystem,
    outage: &OutageSpec,
    params: &SolverParams,
    fixed: &[(usize, f64)],
    binary_limit: usize,
) -> Result<Enumeration, OracleError> {
    let columns: Vec<usize> =
        form.program.free_binaries().into_iter().filter(|b| !fixed.iter().any(|f| f.0 == *b)).collect();
    if columns.len() > binary_limit {
        return Err(OracleError::TooManyBinaries { found: columns.len(), limit: binary_limit });
    }
    let settings = SolveSettings { feas_tol: params.feas_tol, gap_tol: params.gap_tol, ..SolveSettings::default() };
    let n = columns.len();
    let total: u64 = 1 << n;

    let el = &form.topology.electric;
    let switch_state = |fix: &[(usize, f64)]| -> Vec<bool> {
        system
            .electric
            .branches
            .iter()
            .enumerate()
            .map(|(k, _)| match form.varmap.get(Symbol::Switch(k)) {
                Some(col) => {
                    let fixed_val = fix.iter().find(|f| f.0 == col).map(|f| f.1);
                    fixed_val.unwrap_or(form.program.lower[col]) > 0.5
                }
                None => false,
            })
            .collect()
    };

    let assignment = |mask: u64| -> Vec<(usize, f64)> {
        let mut f = fixed.to_vec();
        f.extend(columns.iter().enumerate().map(|(i, &c)| (c, ((mask >> i) & 1) as f64)));
        f
    };
    let evaluate = |mask: u64| -> Result<Option<Option<f64>>, OracleError> {
        let f = assignment(mask);
        if !is_spanning_tree(system, el, &switch_state(&f)) {
            return Ok(None);
        }
        let sol = solve_socp(&form.program, &f, &settings)?;
        Ok(Some((sol.status == SolveStatus::Optimal).then_some(sol.objective)))
    };

    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(total as usize).max(1);
    let results: Vec<Result<Vec<(u64, Option<Option<f64>>)>, OracleError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| {
                let evaluate = &evaluate;
                scope.spawn(move || {
                    let mut out = Vec::new();
                    let mut mask = w;
                    while mask < total {
                        out.push((mask, evaluate(mask)?));
                        mask += workers as u64;
                    }
                    Ok(out)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("enumeration worker panicked")).collect()
    });
    let mut all: BTreeMap<u64, Option<Option<f64>>> = BTreeMap::new();
    for r in results {
        all.extend(r?);
    }

    let mut skipped = 0;
    let mut ranking: Vec<(u64, Assignment)> = Vec::new();
    for (mask, res) in all {
        match res {
            None => skipped += 1,
            Some(objective) => ranking.push((
                mask,
                Assignment { values: (0..n).map(|i| ((mask >> i) & 1) as u8).collect(), objective },
            )),
        }
    }
    ranking.sort_by(|a, b| match (a.1.objective, b.1.objective) {
        (Some(x), Some(y)) => y.total_cmp(&x).then(a.0.cmp(&b.0)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.0.cmp(&b.0),
    });
    let best_objective = ranking.first().and_then(|r| r.1.objective);

    let tols = Tolerances::default();
    let mut best_verified = None;
    for (mask, a) in &ranking {
        let Some(obj) = a.objective else { break };
        let f = assignment(*mask);
        let Ok(sol) = solve_socp(&form.program, &f, &settings) else { continue };
        if sol.status != SolveStatus::Optimal {
            continue;
        }
        let x = polish(form, &sol.x, obj, &settings).unwrap_or(sol.x);
        let plan = RestorationPlan::decode(system, form, &x, obj);
        let report = verify_plan(system, outage, &plan, &tols, params.pump_flow_unit);
        if report.pass {
            best_verified = Some((plan, report));
            break;
        }
        log::warn!("enumeration: assignment with objective {obj} fails verification");
    }
    Ok(Enumeration { columns, ranking: ranking.into_iter().map(|r| r.1).collect(), best_objective, best_verified, skipped })
}
