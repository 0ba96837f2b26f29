//! Reconstruction of the Monge–Ampère solution from a converged disc family.
//!
//! Along each leaf `tau -> (z(w, tau), tau)` the full potential is the
//! harmonic extension of `Psi(z(w, theta), theta)`. Inverting the foliation
//! map puts the relative potential `Phi = u - rho` on a product grid, where
//! finite differences check the degenerate Monge–Ampère equation. The
//! leafwise linear functions give a plurisubharmonic envelope `F` that must
//! agree with `Phi` on the leaves.

mod leaf;
mod product;
mod study;
mod subsolution;

pub use leaf::{derivative_identity_check, reconstruct_on_leaves, DerivativeReport, LeafField};
pub use product::{ma_residual, resample_to_product, Context, INVERSION_TOLERANCE, MaPoint, MaReport, ProductField, ProductGrid};
pub use study::{derivative_study, ma_study, DERIVATIVE_FLOOR, DERIVATIVE_ORDER, MA_FLOOR, MA_ORDER};
pub use subsolution::{
    build_subsolution, leaf_linear_function, psh_check, EnvelopeReport, LeafLinear, PshReport, PshViolation,
    SubsolutionField, CONVEXITY_FLOOR,
};

use hcma_circle::{CircleFunction, C64};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("node {node}: z = {point:?} left the chart at theta = {theta}")]
    LeftChart { node: usize, theta: f64, point: Vec<C64> },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("could not invert the foliation at z = {target:?}, tau = {tau}: residual {residual:e}")]
    InversionFailed { target: Vec<C64>, tau: C64, residual: f64 },
    #[error("z-block of the Hessian is singular at point {index} (smallest eigenvalue {min_eigenvalue:e})")]
    SingularXBlock { index: usize, min_eigenvalue: f64 },
    #[error("reference potential is not convex enough: smallest Hessian eigenvalue {min_eigenvalue} < {floor}")]
    NotConvex { min_eigenvalue: f64, floor: f64 },
    #[error(transparent)]
    Disc(#[from] hcma_discs::DiscError),
    #[error(transparent)]
    Circle(#[from] hcma_circle::CircleError),
}

/// Log-log fit of errors against grid spacing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderFit {
    pub spacings: Vec<f64>,
    pub errors: Vec<f64>,
    pub order: f64,
    pub threshold: f64,
    /// Errors at or below this count as converged whatever the fitted order.
    pub floor: f64,
    pub passed: bool,
}

/// Least-squares slope of `ln error` against `ln h`. Passes when the slope
/// reaches `threshold` or every error is already at the roundoff `floor`.
pub fn fit_order(spacings: &[f64], errors: &[f64], threshold: f64, floor: f64) -> OrderFit {
    let xs: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(1e-300).ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let order = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    let at_floor = errors.iter().all(|&e| e <= floor);
    OrderFit {
        spacings: spacings.to_vec(),
        errors: errors.to_vec(),
        order,
        threshold,
        floor,
        passed: at_floor || order >= threshold,
    }
}

/// Value at angle `eta` of the trigonometric interpolant of `f`, matching
/// the boundary limit of `poisson_extend`.
pub(crate) fn boundary_value(f: &CircleFunction, eta: f64) -> C64 {
    let n = f.grid().size() as i64;
    let mut acc = f.coeff(0);
    for m in 1..n / 2 {
        let e = C64::from_polar(1.0, m as f64 * eta);
        acc += f.coeff(m) * e + f.coeff(-m) * e.conj();
    }
    acc + f.coeff(-n / 2) * (n as f64 / 2.0 * eta).cos()
}

/// Harmonic extension of `f` at `tau`, with the boundary handled by interpolation.
pub(crate) fn harmonic_at(f: &CircleFunction, tau: C64) -> Result<f64, FieldError> {
    if tau.norm() > hcma_circle::POISSON_RADIUS_LIMIT {
        if tau.norm() > 1.0 + 1e-12 {
            return Err(hcma_circle::CircleError::OutsideDisk(tau.norm()).into());
        }
        return Ok(boundary_value(f, tau.arg()).re);
    }
    Ok(hcma_circle::poisson_extend(f, tau)?.re)
}
