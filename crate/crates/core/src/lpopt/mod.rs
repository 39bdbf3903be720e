//! Weighted L^p-optimal monic polynomials on grids.

mod basis;
mod norm;
mod poly;
mod solvers;

pub use basis::{build_basis, BasisHandle, BasisMethod, Column, Recurrence, MAX_DEGREE};
pub use norm::{log_weighted_values, weighted_norm, NormReport, PNorm};
pub use poly::{MonicPolynomial, PolyRepr, PolySummary};
pub use solvers::{
    alternation_count, gram_solve_p2, irls_solve, lawson_solve_inf, monic_orthogonal, remez_polish, SolveOptions,
    SolveStatus, Solution,
};
