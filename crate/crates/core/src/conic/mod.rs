//! Continuous conic programs and their solution.

mod check;
mod program;
mod solve;
mod text;

pub use check::{check_solution, ResidualReport};
pub use program::{AffineExpr, ConeBlock, ConeKind, ConicProgram, LinearRow, RowKind, Sense};
pub use solve::{solve_socp, ContinuousSolution, SolveSettings, SolveStatus};
pub use text::{export_program, import_program};
