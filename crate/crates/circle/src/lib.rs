//! Discrete harmonic analysis on the unit circle and the closed unit disc.
//!
//! Boundary functions live on an equispaced [`CircleGrid`] and carry their
//! Fourier coefficients; holomorphic functions on the disc are truncated
//! Taylor series ([`HolomorphicDisc`]). On top of these sit the Hilbert
//! transform, Poisson extension and the scalar free-boundary problem
//! `Re u = f`, plus the oscillation estimators (modulus of continuity, dyadic
//! BMO, John-Nirenberg tails, Hölder seminorms) used by the regularity lab.

mod disc;
mod function;
mod grid;
mod ops;
mod oscillation;

pub use disc::{HolomorphicDisc, Projection};
pub use function::CircleFunction;
pub use grid::CircleGrid;
pub use ops::{hilbert_transform, poisson_extend, solve_riemann_hilbert, POISSON_RADIUS_LIMIT};
pub use oscillation::{
    bmo_norm, bmo_of_values, bmo_profile, holder_seminorm_circle, holder_seminorm_line, jn_tail,
    modulus_of_continuity, ArcOscillation, Metric, PairScan,
};

pub use num_complex::Complex64 as C64;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircleError {
    #[error("circle size {0} must be a power of two and at least 8")]
    InvalidSize(usize),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("|tau| = {0} lies outside the disc of radius 1 - 1e-12")]
    OutsideDisk(f64),
    #[error("Re(anchor) differs from f at tau = -i by {0:e}")]
    IncompatibleAnchor(f64),
    #[error("boundary data is not real (imaginary part up to {0:e})")]
    NotReal(f64),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for CircleError {
    fn from(e: csv::Error) -> Self {
        CircleError::Csv(e.to_string())
    }
}
