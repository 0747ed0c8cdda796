use crate::error::ConicError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Sparse affine function `Σ coef·x[idx] + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn var(idx: usize) -> Self {
        AffineExpr { terms: vec![(idx, 1.0)], constant: 0.0 }
    }

    pub fn scaled(idx: usize, coef: f64) -> Self {
        AffineExpr { terms: vec![(idx, coef)], constant: 0.0 }
    }

    pub fn constant(value: f64) -> Self {
        AffineExpr { terms: Vec::new(), constant: value }
    }

    pub fn linear(terms: Vec<(usize, f64)>) -> Self {
        AffineExpr { terms, constant: 0.0 }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }

    pub fn plus(mut self, other: &AffineExpr, factor: f64) -> Self {
        self.terms.extend(other.terms.iter().map(|&(i, c)| (i, c * factor)));
        self.constant += other.constant * factor;
        self
    }

    pub fn times(mut self, factor: f64) -> Self {
        for t in &mut self.terms {
            t.1 *= factor;
        }
        self.constant *= factor;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `a·x = rhs`
    Eq,
    /// `a·x ≤ rhs`
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub terms: Vec<(usize, f64)>,
    pub kind: RowKind,
    pub rhs: f64,
    pub tag: String,
}

impl LinearRow {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, c)| c * x[i]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    /// `e0 ≥ ‖(e1, …, ek)‖`
    SecondOrder,
    /// `2·e0·e1 ≥ ‖(e2, …, ek)‖²`, `e0, e1 ≥ 0`
    Rotated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub entries: Vec<AffineExpr>,
    pub tag: String,
}

impl ConeBlock {
    /// Signed distance-like violation; positive when the point is outside.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let vals: Vec<f64> = self.entries.iter().map(|e| e.eval(x)).collect();
        match self.kind {
            ConeKind::SecondOrder => {
                let norm = vals[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                let scale = 1.0f64.max(norm).max(vals[0].abs());
                (norm - vals[0]) / scale
            }
            ConeKind::Rotated => {
                let sq = vals[2..].iter().map(|v| v * v).sum::<f64>();
                let prod = 2.0 * vals[0] * vals[1];
                let scale = 1.0f64.max(sq).max(prod.abs());
                ((sq - prod) / scale).max(-vals[0]).max(-vals[1])
            }
        }
    }
}

/// Mixed-integer conic program over real variables with optional binaries.
///
/// Row, cone and bound tags name the model constraint each item realizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub sense: Sense,
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
    pub rows: Vec<LinearRow>,
    pub cones: Vec<ConeBlock>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub binaries: Vec<usize>,
    pub names: Vec<String>,
    pub bound_tags: Vec<String>,
}

impl Default for ConicProgram {
    fn default() -> Self {
        ConicProgram::new(Sense::Minimize)
    }
}

impl ConicProgram {
    pub fn new(sense: Sense) -> Self {
        ConicProgram {
            sense,
            objective: Vec::new(),
            objective_constant: 0.0,
            rows: Vec::new(),
            cones: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            binaries: Vec::new(),
            names: Vec::new(),
            bound_tags: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.add_tagged_var(name, lower, upper, "")
    }

    pub fn add_tagged_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, tag: &str) -> usize {
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.push(name.into());
        self.bound_tags.push(tag.to_string());
        self.lower.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        let idx = self.add_var(name, 0.0, 1.0);
        self.binaries.push(idx);
        idx
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, kind: RowKind, rhs: f64, tag: &str) -> usize {
        self.rows.push(LinearRow { terms, kind, rhs, tag: tag.to_string() });
        self.rows.len() - 1
    }

    pub fn add_cone(&mut self, kind: ConeKind, entries: Vec<AffineExpr>, tag: &str) -> usize {
        self.cones.push(ConeBlock { kind, entries, tag: tag.to_string() });
        self.cones.len() - 1
    }

    /// `lhs ≥ Σ (coef_k·x_k)²` as a rotated cone `(lhs, 1/2, coef_k·x_k)`.
    pub fn add_quadratic_le(&mut self, lhs: AffineExpr, squares: Vec<(usize, f64)>, tag: &str) -> usize {
        let mut entries = vec![lhs, AffineExpr::constant(0.5)];
        entries.extend(squares.into_iter().map(|(i, c)| AffineExpr::scaled(i, c)));
        self.add_cone(ConeKind::Rotated, entries, tag)
    }

    pub fn add_objective(&mut self, idx: usize, coef: f64) {
        self.objective.push((idx, coef));
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }

    pub fn is_binary(&self, idx: usize) -> bool {
        self.binaries.contains(&idx)
    }

    /// Binaries whose bounds still allow both 0 and 1.
    pub fn free_binaries(&self) -> Vec<usize> {
        self.binaries.iter().copied().filter(|&i| self.lower[i] < 0.5 && self.upper[i] > 0.5).collect()
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        let n = self.n_vars();
        if self.upper.len() != n {
            return Err(ConicError::Dimension { expected: n, got: self.upper.len() });
        }
        if self.names.len() != n {
            return Err(ConicError::Dimension { expected: n, got: self.names.len() });
        }
        let check = |i: usize| {
            if i < n {
                Ok(())
            } else {
                Err(ConicError::IndexOutOfRange { index: i, n_vars: n })
            }
        };
        for &(i, _) in &self.objective {
            check(i)?;
        }
        for r in &self.rows {
            for &(i, _) in &r.terms {
                check(i)?;
            }
        }
        for c in &self.cones {
            let min_len = match c.kind {
                ConeKind::SecondOrder => 1,
                ConeKind::Rotated => 2,
            };
            if c.entries.len() < min_len {
                return Err(ConicError::Dimension { expected: min_len, got: c.entries.len() });
            }
            for e in &c.entries {
                for &(i, _) in &e.terms {
                    check(i)?;
                }
            }
        }
        for &b in &self.binaries {
            check(b)?;
        }
        Ok(())
    }

    /// All distinct constraint tags (rows, cones, bounds), comma-split.
    pub fn tags(&self) -> std::collections::BTreeSet<String> {
        self.rows
            .iter()
            .map(|r| r.tag.as_str())
            .chain(self.cones.iter().map(|c| c.tag.as_str()))
            .chain(self.bound_tags.iter().map(String::as_str))
            .flat_map(|t| t.split(','))
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    }
}
