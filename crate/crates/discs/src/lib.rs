//! Nonlinear free-boundary solver for families of holomorphic discs.
//!
//! For each spatial node `w` in a chart of `C^n` we look for holomorphic
//! `z, xi : D -> C^n` with `z(w, -i) = w` and the Lagrangian boundary
//! condition `xi = dPsi(z, theta)` on the circle. Newton steps linearize the
//! boundary condition and solve the linear problem with circle-dependent
//! coefficients; an optional Zehnder schedule truncates each correction.

mod checks;
mod expr;
mod family;
mod grid;
mod potential;
mod solver;

pub use checks::{
    gauge_shift_check, smallness_check, GaugeReport, SmallnessReport, Verdict, GAUGE_TOLERANCE, SMALLNESS_THRESHOLD,
};
pub use expr::ExpressionPotential;
pub use family::{trivial_foliation, trivial_node, DiscFamily};
pub use grid::{ChartBox, Layout, SpatialGrid};
pub use potential::{
    consistency_check, fd_derivatives, ConsistencyReport, Euclidean, GaugeShifted, Potential, Quartic, SharedPotential,
    Translation,
};
pub use solver::{
    foliation_check, foliation_samples, iterate_from, newton_step, node_jacobians, node_residual, residual,
    solve_discs, solve_node, sup_residual, FoliationReport, Mode, NashMoserConfig, SolveSummary, StepReport,
    FOLIATION_DET_FLOOR,
};

use hcma_circle::C64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscError {
    #[error("node {node}: z = {point:?} left the chart at theta = {theta}")]
    LeftChart { node: usize, theta: f64, point: Vec<C64> },
    #[error("no convergence after {iterations} Newton steps, residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64, history: Vec<f64> },
    #[error("node {node}: |det| of the foliation Jacobian is {det:e}, below 0.1")]
    FoliationDegenerate { node: usize, det: f64 },
    #[error("gauge is not pluriharmonic (d dbar h up to {0:e})")]
    NotSameForm(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("expression: {0}")]
    Parse(String),
    #[error(transparent)]
    Linear(#[from] hcma_linear::LinearError),
    #[error(transparent)]
    Circle(#[from] hcma_circle::CircleError),
}
