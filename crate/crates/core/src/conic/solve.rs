use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use super::program::{AffineExpr, ConeKind, ConicProgram, RowKind, Sense};
use crate::error::ConicError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: u32,
    /// Seconds; `None` for no limit.
    pub time_limit: Option<f64>,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings { feas_tol: 1e-8, gap_tol: 1e-8, max_iter: 200, time_limit: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Objective in the program's own sense, evaluated at `x`.
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// |primal − dual| objective, absolute.
    pub gap: f64,
    pub iterations: u32,
}

impl ContinuousSolution {
    fn without_solve(status: SolveStatus, x: Vec<f64>, objective: f64) -> Self {
        ContinuousSolution { status, x, objective, primal_residual: 0.0, dual_residual: 0.0, gap: 0.0, iterations: 0 }
    }
}

/// Solves the continuous relaxation of `program` with the given binaries
/// fixed; other binaries are relaxed to [0, 1].
pub fn solve_socp(
    program: &ConicProgram,
    fixed: &[(usize, f64)],
    settings: &SolveSettings,
) -> Result<ContinuousSolution, ConicError> {
    program.validate()?;
    let n = program.n_vars();
    let mut lo = program.lower.clone();
    let mut hi = program.upper.clone();
    for &b in &program.binaries {
        lo[b] = lo[b].max(0.0);
        hi[b] = hi[b].min(1.0);
    }
    for &(i, v) in fixed {
        if i >= n {
            return Err(ConicError::IndexOutOfRange { index: i, n_vars: n });
        }
        if !program.is_binary(i) || !(v == 0.0 || v == 1.0) {
            return Err(ConicError::BadFixing { index: i, value: v });
        }
        lo[i] = v;
        hi[i] = v;
    }
    if (0..n).any(|i| lo[i] > hi[i]) {
        return Ok(ContinuousSolution::without_solve(SolveStatus::Infeasible, vec![0.0; n], f64::NAN));
    }

    let mut reduced = Reduced::new(&lo, &hi);
    let mut zero_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut zero_b = Vec::new();
    let mut nonneg_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut nonneg_b = Vec::new();
    const EMPTY_TOL: f64 = 1e-9;

    for row in &program.rows {
        let (terms, shift) = reduced.map_terms(&row.terms);
        let rhs = row.rhs - shift;
        if terms.is_empty() {
            let ok = match row.kind {
                RowKind::Eq => rhs.abs() <= EMPTY_TOL * (1.0 + row.rhs.abs()),
                RowKind::Le => rhs >= -EMPTY_TOL * (1.0 + row.rhs.abs()),
            };
            if !ok {
                return Ok(ContinuousSolution::without_solve(SolveStatus::Infeasible, reduced.expand(&[]), f64::NAN));
            }
            continue;
        }
        let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.1.abs()));
        let scaled: Vec<(usize, f64)> = terms.iter().map(|&(j, c)| (j, c / scale)).collect();
        match row.kind {
            RowKind::Eq => {
                zero_rows.push(scaled);
                zero_b.push(rhs / scale);
            }
            RowKind::Le => {
                nonneg_rows.push(scaled);
                nonneg_b.push(rhs / scale);
            }
        }
    }
    for (j, &orig) in reduced.free.iter().enumerate() {
        if lo[orig].is_finite() {
            nonneg_rows.push(vec![(j, -1.0)]);
            nonneg_b.push(-lo[orig]);
        }
        if hi[orig].is_finite() {
            nonneg_rows.push(vec![(j, 1.0)]);
            nonneg_b.push(hi[orig]);
        }
    }

    // cone entries e = a·x + c become slack rows  -a·x + s = c
    let mut soc_blocks: Vec<Vec<(Vec<(usize, f64)>, f64)>> = Vec::new();
    for cone in &program.cones {
        let entries: Vec<AffineExpr> = match cone.kind {
            ConeKind::SecondOrder => cone.entries.clone(),
            ConeKind::Rotated => {
                let p = &cone.entries[0];
                let q = &cone.entries[1];
                let mut out = vec![p.clone().plus(q, 1.0), p.clone().plus(q, -1.0)];
                out.extend(cone.entries[2..].iter().map(|e| e.clone().times(std::f64::consts::SQRT_2)));
                out
            }
        };
        let mapped: Vec<(Vec<(usize, f64)>, f64)> = entries
            .iter()
            .map(|e| {
                let (terms, shift) = reduced.map_terms(&e.terms);
                (terms, e.constant + shift)
            })
            .collect();
        if mapped.len() == 1 {
            let (terms, c) = &mapped[0];
            if terms.is_empty() {
                if *c < -EMPTY_TOL {
                    return Ok(ContinuousSolution::without_solve(SolveStatus::Infeasible, reduced.expand(&[]), f64::NAN));
                }
                continue;
            }
            nonneg_rows.push(terms.iter().map(|&(j, a)| (j, -a)).collect());
            nonneg_b.push(*c);
            continue;
        }
        soc_blocks.push(mapped);
    }

    let m_free = reduced.free.len();
    let sign = if program.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let mut q = vec![0.0; m_free];
    let mut obj_shift = program.objective_constant;
    for &(i, c) in &program.objective {
        match reduced.new_index[i] {
            Some(j) => q[j] += sign * c,
            None => obj_shift += c * reduced.value[i],
        }
    }

    if m_free == 0 {
        let x = reduced.expand(&[]);
        let feasible = soc_blocks.iter().all(|blk| {
            let t = blk[0].1;
            let norm = blk[1..].iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
            norm <= t + EMPTY_TOL * (1.0 + t.abs())
        });
        let status = if feasible { SolveStatus::Optimal } else { SolveStatus::Infeasible };
        return Ok(ContinuousSolution::without_solve(status, x, obj_shift));
    }

    let mut rows_a: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut b = Vec::new();
    let mut cones = Vec::new();
    if !zero_rows.is_empty() {
        cones.push(SupportedConeT::ZeroConeT(zero_rows.len()));
        rows_a.extend(zero_rows);
        b.extend(zero_b);
    }
    if !nonneg_rows.is_empty() {
        cones.push(SupportedConeT::NonnegativeConeT(nonneg_rows.len()));
        rows_a.extend(nonneg_rows);
        b.extend(nonneg_b);
    }
    for blk in soc_blocks {
        let scale = blk
            .iter()
            .flat_map(|(t, c)| t.iter().map(|e| e.1.abs()).chain(std::iter::once(c.abs())))
            .fold(0.0f64, f64::max)
            .max(1e-12);
        cones.push(SupportedConeT::SecondOrderConeT(blk.len()));
        for (terms, c) in blk {
            rows_a.push(terms.iter().map(|&(j, a)| (j, -a / scale)).collect());
            b.push(c / scale);
        }
    }

    let a = csc_from_rows(rows_a.len(), m_free, &rows_a);
    let p = CscMatrix::zeros((m_free, m_free));
    let mut opts = DefaultSettings::<f64> {
        verbose: false,
        max_iter: settings.max_iter,
        tol_feas: settings.feas_tol,
        tol_gap_abs: settings.gap_tol,
        tol_gap_rel: settings.gap_tol,
        max_threads: 1,
        ..DefaultSettings::default()
    };
    if let Some(t) = settings.time_limit {
        opts.time_limit = t.max(0.0);
    }
    let mut solver = match DefaultSolver::new(&p, &q, &a, &b, &cones, opts) {
        Ok(s) => s,
        Err(_) => return Ok(ContinuousSolution::without_solve(SolveStatus::NumericalLimit, reduced.expand(&[]), f64::NAN)),
    };
    solver.solve();
    let sol = &solver.solution;
    let status = match sol.status {
        SolverStatus::Solved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
        _ => SolveStatus::NumericalLimit,
    };
    let x = reduced.expand(&sol.x);
    let objective = if status == SolveStatus::Optimal { program.objective_value(&x) } else { f64::NAN };
    Ok(ContinuousSolution {
        status,
        x,
        objective,
        primal_residual: sol.r_prim,
        dual_residual: sol.r_dual,
        gap: (sol.obj_val - sol.obj_val_dual).abs(),
        iterations: sol.iterations,
    })
}

/// Column map after eliminating variables with equal bounds.
struct Reduced {
    free: Vec<usize>,
    new_index: Vec<Option<usize>>,
    value: Vec<f64>,
}

impl Reduced {
    fn new(lo: &[f64], hi: &[f64]) -> Self {
        let mut free = Vec::new();
        let mut new_index = vec![None; lo.len()];
        let mut value = vec![0.0; lo.len()];
        for i in 0..lo.len() {
            if lo[i] == hi[i] {
                value[i] = lo[i];
            } else {
                new_index[i] = Some(free.len());
                free.push(i);
            }
        }
        Reduced { free, new_index, value }
    }

    /// Returns merged reduced terms and the constant contributed by fixed columns.
    fn map_terms(&mut self, terms: &[(usize, f64)]) -> (Vec<(usize, f64)>, f64) {
        let mut shift = 0.0;
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for &(i, c) in terms {
            match self.new_index[i] {
                Some(j) => out.push((j, c)),
                None => shift += c * self.value[i],
            }
        }
        out.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(out.len());
        for (j, c) in out {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += c,
                _ => merged.push((j, c)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        (merged, shift)
    }

    fn expand(&self, reduced_x: &[f64]) -> Vec<f64> {
        let mut x = self.value.clone();
        for (j, &i) in self.free.iter().enumerate() {
            x[i] = reduced_x.get(j).copied().unwrap_or(0.0);
        }
        x
    }
}

fn csc_from_rows(m: usize, n: usize, rows: &[Vec<(usize, f64)>]) -> CscMatrix<f64> {
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (r, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            cols[j].push((r, v));
        }
    }
    let mut colptr = Vec::with_capacity(n + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for col in cols {
        for (r, v) in col {
            rowval.push(r);
            nzval.push(v);
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}
