//! Numerical experiments on the Hilbert transform in a parameter direction.
//!
//! A [`ParamFamily`] is a stack of circle functions `f(x, .)` indexed by a
//! parameter `x`. The experiments take the Hilbert transform of every slice
//! and watch how Hölder quotients in `x` behave. Quotients stay bounded in
//! BMO while their sup norms grow like `log(1/|x - x'|)`, and Hölder norms
//! blow up as the target index approaches the source index.

mod family;
mod lab;
mod report;

pub use family::{cutoff, ParamFamily, CUTOFF_END};
pub use lab::{
    bmo_uniformity_check, counterexample_family, counterexample_value, czo_bmo_bound_check, holder_blowup_fit, jn_tail_fit,
    log_growth_fit, offaxis_holder_scan, OFFAXIS_ANGLES,
};
pub use report::{linear_fit, Fit, RegularityReport, Table};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegularityError {
    #[error("Hölder index {0} must lie in (0, 1)")]
    InvalidAlpha(f64),
    #[error("parameter grid must be {{0}} followed by x_j = 2^-j halving: {0}")]
    GridNotGeometric(String),
    #[error("need at least 4 target indices in (0, alpha), got {0:?}")]
    BadBetas(Vec<f64>),
    #[error("need at least 10 trials, got {0}")]
    TooFewTrials(usize),
    #[error("need at least two parameter levels, got {0}")]
    TooFewLevels(usize),
    #[error(transparent)]
    Circle(#[from] hcma_circle::CircleError),
    #[error("io: {0}")]
    Io(String),
}
