//! Linearized free-boundary solver for holomorphic disc families.
//!
//! At every spatial node the unknown is a pair of `n`-vectors of holomorphic
//! functions `(z, xi)` on the disc with
//!
//! ```text
//! xi - A conj(z) - B z = b   on the circle,      z(-i) = 0,
//! ```
//!
//! `A` Hermitian with `det A >= sigma`, `B` symmetric. With constant
//! coefficients the problem splits into two scalar Riemann-Hilbert problems
//! for `g1 = xi - B z - conj(A) z` and `g2 = xi - B z + conj(A) z`. Coefficients
//! that vary along the circle are handled by iterating the constant solve
//! on the defect data.

mod export;
mod fields;
mod solve;

pub use export::{solution_csv, summary_json};
pub use fields::{BoundaryCoeffField, BoundaryData, HermitianField, Mat, SymmetricField};
pub use solve::{
    boundary_residual, decouple, recouple, solve_linear_perturbed, solve_linear_trivial,
    solve_node_perturbed, solve_node_trivial, LinearSolution, NodeReport, NodeSolution, SolveReport,
    MAX_CONDITION,
};

pub use hcma_circle::C64;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("node {node}: det A = {det:e} is below sigma = {sigma:e}")]
    DegenerateA { node: usize, det: f64, sigma: f64 },
    #[error("node {node}: condition number {cond:e} exceeds the 1e8 limit")]
    IllConditioned { node: usize, cond: f64 },
    #[error("node {node}: matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { node: usize, defect: f64 },
    #[error("node {node}: matrix is not symmetric (defect {defect:e})")]
    NotSymmetric { node: usize, defect: f64 },
    #[error("node {node}: data norm failed to decrease for 3 consecutive steps ({norms:?})")]
    NoContraction { node: usize, norms: Vec<f64> },
    #[error("node {node}: no convergence within {iterations} iterations")]
    MaxIterations { node: usize, iterations: usize },
    #[error(transparent)]
    Circle(#[from] hcma_circle::CircleError),
}
