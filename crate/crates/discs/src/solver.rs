use std::f64::consts::PI;

use hcma_circle::{CircleFunction, CircleGrid, HolomorphicDisc, C64};
use hcma_linear::{solve_node_perturbed, BoundaryData, Mat, NodeSolution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{trivial_node, ChartBox, DiscError, DiscFamily, Potential, SpatialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    PlainNewton,
    /// Newton corrections truncated at a decreasing Fourier mode.
    ZehnderSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NashMoserConfig {
    pub mode: Mode,
    /// Hölder indices `0 < beta < alpha < 1`.
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub lambda: f64,
    /// Target sup norm of the boundary residual.
    pub residual_tol: f64,
    pub max_outer_iterations: usize,
    /// Cap on the inexact-Newton forcing term of the inner linear solve.
    pub inner_tol: f64,
    pub inner_max_iterations: usize,
    /// Floor on `det` of the averaged `d dbar Psi`.
    pub sigma: f64,
}

impl Default for NashMoserConfig {
    fn default() -> Self {
        Self {
            mode: Mode::PlainNewton,
            alpha: 0.5,
            beta: 0.25,
            kappa: 1.5,
            lambda: 0.5,
            residual_tol: 1e-11,
            max_outer_iterations: 30,
            inner_tol: 1e-2,
            inner_max_iterations: 60,
            sigma: 1e-3,
        }
    }
}

impl NashMoserConfig {
    pub fn validate(&self) -> Result<(), DiscError> {
        let bad = |m: &str| Err(DiscError::InvalidConfig(m.to_string()));
        if !(0.0 < self.beta && self.beta < self.alpha && self.alpha < 1.0) {
            return bad("need 0 < beta < alpha < 1");
        }
        if !(self.residual_tol > 0.0) || !(self.inner_tol > 0.0) || !(self.sigma > 0.0) {
            return bad("tolerances and sigma must be positive");
        }
        if !(self.kappa > 1.0) || !(self.lambda > 0.0) {
            return bad("need kappa > 1 and lambda > 0");
        }
        if self.max_outer_iterations == 0 || self.inner_max_iterations == 0 {
            return bad("iteration budgets must be positive");
        }
        Ok(())
    }

    /// Highest Taylor mode kept at outer step `step >= 1` in the Zehnder mode:
    /// `ceil(K exp(-lambda kappa^step) + ceil(beta K))`, at most `K`.
    pub fn cutoff(&self, order: usize, step: usize) -> usize {
        let k = order as f64;
        let k_beta = (self.beta * k).ceil();
        let c = (k * (-self.lambda * self.kappa.powi(step as i32)).exp() + k_beta).ceil();
        (c as usize).min(order)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub residual_before: f64,
    pub residual_after: f64,
    /// Largest `sum |a_k|` of any correction component.
    pub correction: f64,
    pub linear_iterations: usize,
    pub contraction_ratio: f64,
    pub cutoff: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub mode: Mode,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub steps: Vec<StepReport>,
    pub fixed_point_error: f64,
    pub holomorphy_defect: f64,
    pub foliation: Option<FoliationReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoliationReport {
    pub min_abs_det: f64,
    pub worst_node: usize,
    pub samples: usize,
}

/// `|det|` of the real Jacobian of `w -> z(w, tau)` must stay above this.
pub const FOLIATION_DET_FLOOR: f64 = 0.1;

fn traces(discs: &[HolomorphicDisc], grid: &CircleGrid) -> Vec<Vec<C64>> {
    discs.iter().map(|d| d.trace(grid).samples().to_vec()).collect()
}

fn point(zt: &[Vec<C64>], j: usize) -> Vec<C64> {
    zt.iter().map(|c| c[j]).collect()
}

/// `xi(theta) - dPsi(z(theta), theta)` at one node.
pub fn node_residual(
    node: usize,
    sol: &NodeSolution,
    pot: &dyn Potential,
    chart: &ChartBox,
    grid: &CircleGrid,
) -> Result<Vec<CircleFunction>, DiscError> {
    let (zt, xt) = (traces(&sol.z, grid), traces(&sol.xi, grid));
    let n = zt.len();
    let mut out = vec![Vec::with_capacity(grid.size()); n];
    for j in 0..grid.size() {
        let z = point(&zt, j);
        if !chart.contains(&z) {
            return Err(DiscError::LeftChart { node, theta: grid.theta(j), point: z });
        }
        let g = pot.grad(&z, grid.theta(j));
        for i in 0..n {
            out[i].push(xt[i][j] - g[i]);
        }
    }
    Ok(out.into_iter().map(|s| CircleFunction::from_samples(grid, s).expect("grid length")).collect())
}

fn sup(fs: &[CircleFunction]) -> f64 {
    fs.iter().map(|f| f.sup_norm()).fold(0.0, f64::max)
}

/// Boundary residual `T(G, dPsi)` of every node.
pub fn residual(fam: &DiscFamily, pot: &dyn Potential, chart: &ChartBox) -> Result<BoundaryData, DiscError> {
    let nodes: Result<Vec<_>, _> =
        (0..fam.len()).into_par_iter().map(|k| node_residual(k, &fam.nodes[k], pot, chart, &fam.grid)).collect();
    Ok(BoundaryData::new(&fam.grid, nodes?)?)
}

pub fn sup_residual(fam: &DiscFamily, pot: &dyn Potential, chart: &ChartBox) -> Result<f64, DiscError> {
    Ok(residual(fam, pot, chart)?.sup_norm())
}

struct NodeStep {
    sol: NodeSolution,
    before: f64,
    after: f64,
    correction: f64,
    iterations: usize,
    ratio: f64,
}

fn node_step(
    node: usize,
    sol: &NodeSolution,
    pot: &dyn Potential,
    chart: &ChartBox,
    grid: &CircleGrid,
    cfg: &NashMoserConfig,
    cutoff: Option<usize>,
) -> Result<NodeStep, DiscError> {
    let t = node_residual(node, sol, pot, chart, grid)?;
    let before = sup(&t);
    if before == 0.0 {
        return Ok(NodeStep { sol: sol.clone(), before, after: 0.0, correction: 0.0, iterations: 0, ratio: 0.0 });
    }
    let zt = traces(&sol.z, grid);
    let n = zt.len();
    let (mut a_t, mut b_t) = (Vec::with_capacity(grid.size()), Vec::with_capacity(grid.size()));
    for j in 0..grid.size() {
        let z = point(&zt, j);
        a_t.push(pot.hess_mixed(&z, grid.theta(j)));
        b_t.push(pot.hess_holo(&z, grid.theta(j)));
    }
    let scale = C64::new(1.0 / grid.size() as f64, 0.0);
    let mean = |ms: &[Mat]| ms.iter().fold(Mat::zeros(n, n), |acc, m| acc + m) * scale;
    let a = mean(&a_t);
    let a = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    let b = mean(&b_t);
    let b = (&b + b.transpose()) * C64::new(0.5, 0.0);
    // forcing term min(inner_tol, |T|) keeps the outer convergence quadratic
    let eta = cfg.inner_tol.min(before);
    let tol = eta * before / (1.0 + before);
    let (mut corr, report) = solve_node_perturbed(node, &a_t, &b_t, &a, &b, cfg.sigma, &t, tol, cfg.inner_max_iterations)?;
    if let Some(c) = cutoff {
        let m = C64::new(0.0, -1.0);
        for d in corr.z.iter_mut() {
            *d = d.truncated(c);
            // truncation moves z(-i); restore the fixed point
            let shift = d.eval(m);
            d.coeffs_mut()[0] -= shift;
        }
        for d in corr.xi.iter_mut() {
            *d = d.truncated(c);
        }
    }
    let correction = corr.z.iter().chain(&corr.xi).map(|d| d.abs_sum()).fold(0.0, f64::max);
    let next = sol.add(&corr.scale(C64::new(-1.0, 0.0)));
    let after = sup(&node_residual(node, &next, pot, chart, grid)?);
    Ok(NodeStep { sol: next, before, after, correction, iterations: report.iterations, ratio: report.contraction_ratio })
}

/// One Newton step on every node; `step` (from 1) drives the Zehnder cutoff.
pub fn newton_step(
    fam: &DiscFamily,
    pot: &dyn Potential,
    chart: &ChartBox,
    cfg: &NashMoserConfig,
    step: usize,
) -> Result<(DiscFamily, StepReport), DiscError> {
    let cutoff = match cfg.mode {
        Mode::PlainNewton => None,
        Mode::ZehnderSchedule => Some(cfg.cutoff(fam.order(), step.max(1))),
    };
    let results: Result<Vec<NodeStep>, DiscError> = (0..fam.len())
        .into_par_iter()
        .map(|k| node_step(k, &fam.nodes[k], pot, chart, &fam.grid, cfg, cutoff))
        .collect();
    let results = results?;
    let report = StepReport {
        residual_before: results.iter().map(|r| r.before).fold(0.0, f64::max),
        residual_after: results.iter().map(|r| r.after).fold(0.0, f64::max),
        correction: results.iter().map(|r| r.correction).fold(0.0, f64::max),
        linear_iterations: results.iter().map(|r| r.iterations).max().unwrap_or(0),
        contraction_ratio: results.iter().map(|r| r.ratio).fold(0.0, f64::max),
        cutoff,
    };
    let next = DiscFamily { grid: fam.grid.clone(), spatial: fam.spatial.clone(), nodes: results.into_iter().map(|r| r.sol).collect() };
    Ok((next, report))
}

/// Newton iteration from `init` until the residual falls below `residual_tol`.
/// Does not run the foliation check.
pub fn iterate_from(
    init: DiscFamily,
    pot: &dyn Potential,
    chart: &ChartBox,
    cfg: &NashMoserConfig,
) -> Result<(DiscFamily, SolveSummary), DiscError> {
    cfg.validate()?;
    if pot.dim() != init.dim() {
        return Err(DiscError::InvalidConfig(format!("potential has n = {}, grid has n = {}", pot.dim(), init.dim())));
    }
    for (k, w) in init.spatial.nodes.iter().enumerate() {
        if !chart.contains(w) {
            return Err(DiscError::LeftChart { node: k, theta: f64::NAN, point: w.clone() });
        }
    }
    let mut fam = init;
    let mut res = sup_residual(&fam, pot, chart)?;
    let mut history = vec![res];
    let mut steps = Vec::new();
    while res > cfg.residual_tol {
        if steps.len() >= cfg.max_outer_iterations || !res.is_finite() {
            return Err(DiscError::NoConvergence { iterations: steps.len(), residual: res, history });
        }
        let (next, report) = newton_step(&fam, pot, chart, cfg, steps.len() + 1)?;
        fam = next;
        res = report.residual_after;
        history.push(res);
        steps.push(report);
    }
    let summary = SolveSummary {
        mode: cfg.mode,
        iterations: steps.len(),
        residual_history: history,
        steps,
        fixed_point_error: fam.fixed_point_error(),
        holomorphy_defect: fam.holomorphy_defect(),
        foliation: None,
    };
    Ok((fam, summary))
}

/// Solves for the disc family starting from the trivial foliation of `rho`,
/// then checks that `w -> z(w, tau)` is a local diffeomorphism.
pub fn solve_discs(
    pot: &dyn Potential,
    rho: &dyn Potential,
    spatial: &SpatialGrid,
    grid: &CircleGrid,
    chart: &ChartBox,
    cfg: &NashMoserConfig,
) -> Result<(DiscFamily, SolveSummary), DiscError> {
    let init = crate::trivial_foliation(rho, spatial, grid);
    let (fam, mut summary) = iterate_from(init, pot, chart, cfg)?;
    let fol = foliation_check(&fam, pot, rho, chart, cfg)?;
    if fol.min_abs_det < FOLIATION_DET_FLOOR {
        return Err(DiscError::FoliationDegenerate { node: fol.worst_node, det: fol.min_abs_det });
    }
    summary.foliation = Some(fol);
    Ok((fam, summary))
}

/// Solves at a single node `w`, independent of any grid.
pub fn solve_node(
    w: &[C64],
    pot: &dyn Potential,
    rho: &dyn Potential,
    grid: &CircleGrid,
    chart: &ChartBox,
    cfg: &NashMoserConfig,
) -> Result<NodeSolution, DiscError> {
    let spatial = SpatialGrid::list(vec![w.to_vec()])?;
    let init = DiscFamily {
        grid: grid.clone(),
        spatial,
        nodes: vec![trivial_node(rho, w, HolomorphicDisc::default_order(grid))],
    };
    let (fam, _) = iterate_from(init, pot, chart, cfg)?;
    Ok(fam.nodes.into_iter().next().expect("one node"))
}

/// Sample points for the foliation check: 8 boundary angles and 8 points at radius 1/2.
pub fn foliation_samples() -> Vec<C64> {
    let boundary = (0..8).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / 8.0));
    let inner = (0..8).map(|k| C64::from_polar(0.5, 2.0 * PI * (k as f64 + 0.5) / 8.0));
    boundary.chain(inner).collect()
}

fn real_coords(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|v| [v.re, v.im]).collect()
}

fn unit(axis: usize) -> C64 {
    if axis % 2 == 0 {
        C64::new(1.0, 0.0)
    } else {
        C64::new(0.0, 1.0)
    }
}

/// Real Jacobians of `w -> z(w, tau)` at node `k` for each `tau`, one column per real axis.
/// Uses the tensor grid where an axis has at least 3 points, otherwise solves
/// at `w +- h e_axis` on demand.
pub fn node_jacobians(
    fam: &DiscFamily,
    k: usize,
    taus: &[C64],
    pot: &dyn Potential,
    rho: &dyn Potential,
    chart: &ChartBox,
    cfg: &NashMoserConfig,
) -> Result<Vec<nalgebra::DMatrix<f64>>, DiscError> {
    let n = fam.dim();
    let mut jacs = vec![nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n); taus.len()];
    let at = |sol: &NodeSolution, tau: C64| real_coords(&sol.z.iter().map(|d| d.eval(tau)).collect::<Vec<_>>());
    for axis in 0..2 * n {
        let columns: Vec<Vec<f64>> = match (fam.spatial.axis_position(k, axis), fam.spatial.spacing()) {
            (Some((pos, points)), Some(h)) if points >= 3 => {
                let node = |off: isize| &fam.nodes[fam.spatial.neighbor(k, axis, off).expect("in range")];
                let (stencil, offsets): ([f64; 3], [isize; 3]) = if pos == 0 {
                    ([-1.5, 2.0, -0.5], [0, 1, 2])
                } else if pos == points - 1 {
                    ([1.5, -2.0, 0.5], [0, -1, -2])
                } else {
                    ([-0.5, 0.0, 0.5], [-1, 0, 1])
                };
                taus.iter()
                    .map(|&tau| {
                        let vals: Vec<Vec<f64>> = offsets.iter().map(|&o| at(node(o), tau)).collect();
                        (0..2 * n).map(|r| (0..3).map(|s| stencil[s] * vals[s][r]).sum::<f64>() / h).collect()
                    })
                    .collect()
            }
            _ => {
                let h = fam.spatial.spacing().unwrap_or(1e-3).min(1e-3);
                let w = &fam.spatial.nodes[k];
                let shifted = |s: f64| {
                    let mut p = w.clone();
                    p[axis / 2] += unit(axis) * s;
                    solve_node(&p, pot, rho, &fam.grid, chart, cfg)
                };
                let (plus, minus) = (shifted(h)?, shifted(-h)?);
                taus.iter()
                    .map(|&tau| at(&plus, tau).iter().zip(at(&minus, tau)).map(|(p, m)| (p - m) / (2.0 * h)).collect())
                    .collect()
            }
        };
        for (jac, col) in jacs.iter_mut().zip(columns) {
            for (r, v) in col.into_iter().enumerate() {
                jac[(r, axis)] = v;
            }
        }
    }
    Ok(jacs)
}

/// Smallest `|det|` of the real Jacobian of `w -> z(w, tau)` over nodes and [`foliation_samples`].
pub fn foliation_check(
    fam: &DiscFamily,
    pot: &dyn Potential,
    rho: &dyn Potential,
    chart: &ChartBox,
    cfg: &NashMoserConfig,
) -> Result<FoliationReport, DiscError> {
    let taus = foliation_samples();
    let dets: Result<Vec<f64>, DiscError> = (0..fam.len())
        .into_par_iter()
        .map(|k| {
            let jacs = node_jacobians(fam, k, &taus, pot, rho, chart, cfg)?;
            Ok(jacs.into_iter().map(|j| j.determinant().abs()).fold(f64::INFINITY, f64::min))
        })
        .collect();
    let dets = dets?;
    let (worst_node, min_abs_det) =
        dets.iter().copied().enumerate().fold((0, f64::INFINITY), |best, (k, d)| if d < best.1 { (k, d) } else { best });
    Ok(FoliationReport { min_abs_det, worst_node, samples: dets.len() * taus.len() })
}
