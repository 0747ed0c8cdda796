use super::program::{ConicProgram, RowKind};
use crate::error::ConicError;

/// Maximum scaled violation per constraint class, plus the items above `tol`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualReport {
    pub equality: f64,
    pub inequality: f64,
    pub bounds: f64,
    /// One entry per cone block.
    pub cones: Vec<f64>,
    pub flagged_rows: Vec<usize>,
    pub flagged_cones: Vec<usize>,
    pub flagged_bounds: Vec<usize>,
}

impl ResidualReport {
    pub fn max_violation(&self) -> f64 {
        self.cones.iter().copied().fold(self.equality.max(self.inequality).max(self.bounds), f64::max)
    }

    pub fn is_clean(&self) -> bool {
        self.flagged_rows.is_empty() && self.flagged_cones.is_empty() && self.flagged_bounds.is_empty()
    }
}

/// Re-substitutes `x` into every row, cone and bound of `program`.
///
/// Row violations are divided by max(1, |rhs|, largest |a_k·x_k|); bound
/// violations by max(1, |bound|).
pub fn check_solution(program: &ConicProgram, x: &[f64], tol: f64) -> Result<ResidualReport, ConicError> {
    if x.len() != program.n_vars() {
        return Err(ConicError::Dimension { expected: program.n_vars(), got: x.len() });
    }
    program.validate()?;
    let mut rep = ResidualReport::default();
    for (k, row) in program.rows.iter().enumerate() {
        let act = row.activity(x);
        let scale = row.terms.iter().map(|&(i, c)| (c * x[i]).abs()).fold(1.0f64.max(row.rhs.abs()), f64::max);
        let v = match row.kind {
            RowKind::Eq => (act - row.rhs).abs() / scale,
            RowKind::Le => ((act - row.rhs) / scale).max(0.0),
        };
        match row.kind {
            RowKind::Eq => rep.equality = rep.equality.max(v),
            RowKind::Le => rep.inequality = rep.inequality.max(v),
        }
        if v > tol {
            rep.flagged_rows.push(k);
        }
    }
    for (k, cone) in program.cones.iter().enumerate() {
        let v = cone.violation(x).max(0.0);
        rep.cones.push(v);
        if v > tol {
            rep.flagged_cones.push(k);
        }
    }
    for i in 0..program.n_vars() {
        let (lo, hi) = (program.lower[i], program.upper[i]);
        let below = if lo.is_finite() { (lo - x[i]) / 1.0f64.max(lo.abs()) } else { 0.0 };
        let above = if hi.is_finite() { (x[i] - hi) / 1.0f64.max(hi.abs()) } else { 0.0 };
        let v = below.max(above).max(0.0);
        rep.bounds = rep.bounds.max(v);
        if v > tol {
            rep.flagged_bounds.push(i);
        }
    }
    Ok(rep)
}
