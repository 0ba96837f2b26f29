use hcma_circle::{CircleGrid, C64};
use hcma_discs::{solve_discs, ChartBox, NashMoserConfig, Potential, SpatialGrid};

use crate::{
    derivative_identity_check, fit_order, ma_residual, reconstruct_on_leaves, resample_to_product, Context,
    DerivativeReport, FieldError, LeafField, MaReport, OrderFit, ProductGrid,
};

/// Required order of the derivative-identity error.
pub const DERIVATIVE_ORDER: f64 = 1.8;
/// Errors below this are roundoff of the difference quotients.
pub const DERIVATIVE_FLOOR: f64 = 1e-10;
/// Required order of `sup |det H|`.
pub const MA_ORDER: f64 = 1.5;
/// Second differences of values accurate to about `1e-13` at `h >= 0.01`.
pub const MA_FLOOR: f64 = 1e-9;

/// Derivative identity on `3^{2n}` leaves around `center` at each spacing.
pub fn derivative_study(
    pot: &dyn Potential,
    rho: &dyn Potential,
    center: &[C64],
    spacings: &[f64],
    grid: &CircleGrid,
    chart: &ChartBox,
    cfg: &NashMoserConfig,
) -> Result<(Vec<DerivativeReport>, OrderFit), FieldError> {
    let mut reports = Vec::with_capacity(spacings.len());
    for &h in spacings {
        let spatial = SpatialGrid::tensor(center.to_vec(), h, 3)?;
        let (fam, _) = solve_discs(pot, rho, &spatial, grid, chart, cfg)?;
        reports.push(derivative_identity_check(&reconstruct_on_leaves(&fam, pot, rho, chart)?)?);
    }
    let errors: Vec<f64> = reports.iter().map(|r| r.sup_error).collect();
    let fit = fit_order(spacings, &errors, DERIVATIVE_ORDER, DERIVATIVE_FLOOR);
    Ok((reports, fit))
}

/// Monge–Ampère residual on product grids of `points` per axis around
/// `(z_center, tau_center)` at each spacing.
pub fn ma_study(
    leaf: &LeafField,
    z_center: &[C64],
    tau_center: C64,
    spacings: &[f64],
    points: usize,
    ctx: Context,
) -> Result<(Vec<MaReport>, OrderFit), FieldError> {
    let mut reports = Vec::with_capacity(spacings.len());
    for &h in spacings {
        let pg = ProductGrid::tensor(z_center.to_vec(), tau_center, h, points)?;
        reports.push(ma_residual(&resample_to_product(leaf, &pg, ctx)?)?);
    }
    let dets: Vec<f64> = reports.iter().map(|r| r.sup_det).collect();
    let fit = fit_order(spacings, &dets, MA_ORDER, MA_FLOOR);
    Ok((reports, fit))
}
