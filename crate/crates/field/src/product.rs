use std::f64::consts::PI;
use std::io::Write;

use hcma_circle::{CircleGrid, C64};
use hcma_discs::{iterate_from, ChartBox, DiscError, DiscFamily, NashMoserConfig, Potential, SpatialGrid};
use hcma_linear::{Mat, NodeSolution};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::leaf::leaf_trace;
use crate::{harmonic_at, FieldError, LeafField};

/// Boundary data, reference potential, chart and solver settings shared by
/// every on-demand disc solve.
#[derive(Clone, Copy)]
pub struct Context<'a> {
    pub pot: &'a dyn Potential,
    pub rho: &'a dyn Potential,
    pub chart: &'a ChartBox,
    pub cfg: &'a NashMoserConfig,
}

/// Points `(z, tau)`: every `z` target paired with every `tau`, index `k + len(targets) * t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGrid {
    pub targets: Vec<Vec<C64>>,
    pub taus: Vec<C64>,
    /// Spacing and points per axis when the grid is a tensor grid over
    /// `(Re z_1, Im z_1, .., Re tau, Im tau)`, axis 0 fastest.
    pub tensor: Option<(f64, usize)>,
}

impl ProductGrid {
    pub fn tensor(z_center: Vec<C64>, tau_center: C64, spacing: f64, points: usize) -> Result<Self, FieldError> {
        let targets = SpatialGrid::tensor(z_center, spacing, points)?.nodes;
        let mid = (points as f64 - 1.0) / 2.0;
        let mut taus = Vec::with_capacity(points * points);
        for b in 0..points {
            for a in 0..points {
                taus.push(tau_center + C64::new((a as f64 - mid) * spacing, (b as f64 - mid) * spacing));
            }
        }
        if let Some(t) = taus.iter().find(|t| t.norm() > 1.0) {
            return Err(DiscError::InvalidConfig(format!("tau = {t} lies outside the closed disc")).into());
        }
        Ok(Self { targets, taus, tensor: Some((spacing, points)) })
    }

    /// `targets` at `angles` equispaced points of the circle.
    pub fn boundary(targets: Vec<Vec<C64>>, angles: usize) -> Result<Self, FieldError> {
        if targets.is_empty() || angles == 0 {
            return Err(DiscError::InvalidConfig("boundary grid needs targets and angles".into()).into());
        }
        let taus = (0..angles).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / angles as f64)).collect();
        Ok(Self { targets, taus, tensor: None })
    }

    pub fn dim(&self) -> usize {
        self.targets[0].len()
    }

    pub fn len(&self) -> usize {
        self.targets.len() * self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> (&[C64], C64) {
        let nz = self.targets.len();
        (&self.targets[index % nz], self.taus[index / nz])
    }
}

/// Relative potential `Phi = u - rho` on a product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductField {
    pub grid: ProductGrid,
    pub phi: Vec<f64>,
    pub rho: Vec<f64>,
    /// Leaf parameter `w` with `z(w, tau) = z_target`.
    pub preimages: Vec<Vec<C64>>,
    pub inversion_residuals: Vec<f64>,
}

/// Largest accepted `|z(w, tau) - z_target|`.
pub const INVERSION_TOLERANCE: f64 = 1e-9;
const INVERSION_TARGET: f64 = 1e-13;
const INVERSION_STEPS: usize = 40;
const JACOBIAN_STEP: f64 = 1e-6;

fn unit(axis: usize) -> C64 {
    if axis % 2 == 0 {
        C64::new(1.0, 0.0)
    } else {
        C64::new(0.0, 1.0)
    }
}

fn real_coords(z: &[C64]) -> DVector<f64> {
    DVector::from_iterator(2 * z.len(), z.iter().flat_map(|v| [v.re, v.im]))
}

fn z_of(sol: &NodeSolution, tau: C64) -> Vec<C64> {
    sol.z.iter().map(|d| d.eval(tau)).collect()
}

/// Disc solve at `w`, started from a nearby solution translated to `w`.
fn solve_near(w: &[C64], near: &(Vec<C64>, NodeSolution), grid: &CircleGrid, ctx: Context) -> Result<NodeSolution, FieldError> {
    let mut init = near.1.clone();
    for (i, d) in init.z.iter_mut().enumerate() {
        d.coeffs_mut()[0] += w[i] - near.0[i];
    }
    let fam = DiscFamily { grid: grid.clone(), spatial: SpatialGrid::list(vec![w.to_vec()])?, nodes: vec![init] };
    let (fam, _) = iterate_from(fam, ctx.pot, ctx.chart, ctx.cfg)?;
    Ok(fam.nodes.into_iter().next().expect("one node"))
}

fn fd_jacobian(w: &[C64], sol: &NodeSolution, tau: C64, grid: &CircleGrid, ctx: Context) -> Result<DMatrix<f64>, FieldError> {
    let n = w.len();
    let base = real_coords(&z_of(sol, tau));
    let near = (w.to_vec(), sol.clone());
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..2 * n {
        let mut p = w.to_vec();
        p[a / 2] += unit(a) * JACOBIAN_STEP;
        let s = solve_near(&p, &near, grid, ctx)?;
        jac.set_column(a, &((real_coords(&z_of(&s, tau)) - &base) / JACOBIAN_STEP));
    }
    Ok(jac)
}

struct Inverted {
    w: Vec<C64>,
    sol: NodeSolution,
    residual: f64,
}

/// Damped chord-Newton for `z(w, tau) = target` from `w = target`. The
/// Jacobian is carried between neighbouring targets and refreshed when the
/// contraction degrades.
fn invert(
    target: &[C64],
    tau: C64,
    warm: &(Vec<C64>, NodeSolution),
    jac: &mut Option<DMatrix<f64>>,
    grid: &CircleGrid,
    ctx: Context,
) -> Result<Inverted, FieldError> {
    let goal = real_coords(target);
    let mut w = target.to_vec();
    let mut sol = solve_near(&w, warm, grid, ctx)?;
    let mut r = real_coords(&z_of(&sol, tau)) - &goal;
    let stop = INVERSION_TARGET * (1.0 + goal.norm());
    let mut fresh = false;
    for _ in 0..INVERSION_STEPS {
        if r.norm() <= stop {
            break;
        }
        if jac.is_none() {
            *jac = Some(fd_jacobian(&w, &sol, tau, grid, ctx)?);
            fresh = true;
        }
        let Some(delta) = jac.as_ref().expect("set above").clone().lu().solve(&r) else {
            return Err(FieldError::InversionFailed { target: target.to_vec(), tau, residual: r.norm() });
        };
        let mut accepted = None;
        let mut lambda = 1.0;
        for _ in 0..10 {
            let trial: Vec<C64> =
                w.iter().enumerate().map(|(i, v)| v - lambda * C64::new(delta[2 * i], delta[2 * i + 1])).collect();
            let near = (w.clone(), sol.clone());
            let s = solve_near(&trial, &near, grid, ctx)?;
            let rt = real_coords(&z_of(&s, tau)) - &goal;
            if rt.norm() < r.norm() {
                accepted = Some((trial, s, rt));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, s, rt)) => {
                if rt.norm() > 0.25 * r.norm() && !fresh {
                    *jac = None;
                }
                w = trial;
                sol = s;
                r = rt;
                fresh = false;
            }
            None if !fresh => *jac = None,
            None => break,
        }
    }
    Ok(Inverted { w, sol, residual: r.norm() })
}

/// Puts `Phi` on `grid` by inverting `w -> z(w, tau)` for every `tau` and
/// evaluating the leafwise harmonic extension at the preimage.
pub fn resample_to_product(leaf: &LeafField, grid: &ProductGrid, ctx: Context) -> Result<ProductField, FieldError> {
    let fam = &leaf.family;
    let cgrid = &fam.grid;
    let nearest = |z: &[C64]| {
        let d = |k: usize| fam.spatial.nodes[k].iter().zip(z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        (0..fam.len()).min_by(|&a, &b| d(a).total_cmp(&d(b))).expect("nonempty family")
    };
    let rows: Result<Vec<Vec<(Vec<C64>, f64, f64)>>, FieldError> = grid
        .taus
        .par_iter()
        .map(|&tau| {
            let k0 = nearest(&grid.targets[0]);
            let mut warm = (fam.spatial.nodes[k0].clone(), fam.nodes[k0].clone());
            let mut jac = None;
            let mut row = Vec::with_capacity(grid.targets.len());
            for target in &grid.targets {
                let inv = invert(target, tau, &warm, &mut jac, cgrid, ctx)?;
                if inv.residual > INVERSION_TOLERANCE {
                    return Err(FieldError::InversionFailed { target: target.clone(), tau, residual: inv.residual });
                }
                let u = harmonic_at(&leaf_trace(0, &inv.sol, cgrid, ctx.pot, ctx.chart)?, tau)?;
                row.push((inv.w.clone(), u, inv.residual));
                warm = (inv.w, inv.sol);
            }
            Ok(row)
        })
        .collect();
    let mut out = ProductField {
        grid: grid.clone(),
        phi: Vec::with_capacity(grid.len()),
        rho: Vec::with_capacity(grid.len()),
        preimages: Vec::with_capacity(grid.len()),
        inversion_residuals: Vec::with_capacity(grid.len()),
    };
    for row in rows? {
        for (k, (w, u, res)) in row.into_iter().enumerate() {
            let r = ctx.rho.value(&grid.targets[k], 0.0);
            out.phi.push(u - r);
            out.rho.push(r);
            out.preimages.push(w);
            out.inversion_residuals.push(res);
        }
    }
    Ok(out)
}

impl ProductField {
    pub fn max_inversion_residual(&self) -> f64 {
        self.inversion_residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `sup |Phi(z, theta) - (Psi(z, theta) - rho(z))|` over points on the circle.
    pub fn boundary_agreement(&self, pot: &dyn Potential) -> f64 {
        (0..self.grid.len())
            .filter_map(|i| {
                let (z, tau) = self.grid.point(i);
                ((tau.norm() - 1.0).abs() < 1e-12).then(|| (self.phi[i] - (pot.value(z, tau.arg()) - self.rho[i])).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Columns `re(z1), im(z1), .., re(tau), im(tau), value`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        write_point_values(&self.grid, &self.phi, w)
    }
}

pub(crate) fn write_point_values<W: Write>(grid: &ProductGrid, values: &[f64], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = Vec::new();
    for i in 1..=grid.dim() {
        header.push(format!("re(z{i})"));
        header.push(format!("im(z{i})"));
    }
    header.extend(["re(tau)".to_string(), "im(tau)".to_string(), "value".to_string()]);
    out.write_record(&header)?;
    for (i, v) in values.iter().enumerate() {
        let (z, tau) = grid.point(i);
        let mut row: Vec<String> = z.iter().flat_map(|c| [format!("{:.17e}", c.re), format!("{:.17e}", c.im)]).collect();
        row.extend([format!("{:.17e}", tau.re), format!("{:.17e}", tau.im), format!("{v:.17e}")]);
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaPoint {
    pub index: usize,
    /// `det` of the complex Hessian of `rho + Phi` in `(z, tau)`.
    pub det: f64,
    /// `Phi_{tau taubar} - Phi_{tau zbar} (rho + Phi)^{z zbar} Phi_{z taubar}`.
    pub residual: f64,
    pub min_z_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaReport {
    pub spacing: f64,
    pub sup_det: f64,
    pub sup_residual: f64,
    pub min_z_eigenvalue: f64,
    pub max_inversion_residual: f64,
    pub points: Vec<MaPoint>,
}

const SINGULAR_FLOOR: f64 = 1e-8;

/// Complex Hessian of the grid function `u` at `index` by centered differences.
fn complex_hessian(u: &[f64], index: usize, axes: usize, points: usize, h: f64) -> Mat {
    let stride = |a: usize| points.pow(a as u32) as isize;
    let at = |moves: &[(usize, isize)]| {
        let i = moves.iter().fold(index as isize, |i, &(a, s)| i + s * stride(a));
        u[i as usize]
    };
    let real = DMatrix::from_fn(axes, axes, |a, b| {
        if a == b {
            (at(&[(a, 1)]) - 2.0 * at(&[]) + at(&[(a, -1)])) / (h * h)
        } else {
            (at(&[(a, 1), (b, 1)]) - at(&[(a, 1), (b, -1)]) - at(&[(a, -1), (b, 1)]) + at(&[(a, -1), (b, -1)])) / (4.0 * h * h)
        }
    });
    let m = axes / 2;
    Mat::from_fn(m, m, |p, q| {
        let (xx, yy) = (real[(2 * p, 2 * q)], real[(2 * p + 1, 2 * q + 1)]);
        let (xy, yx) = (real[(2 * p, 2 * q + 1)], real[(2 * p + 1, 2 * q)]);
        0.25 * C64::new(xx + yy, xy - yx)
    })
}

/// Monge–Ampère residual at every interior point of a tensor product grid.
pub fn ma_residual(field: &ProductField) -> Result<MaReport, FieldError> {
    let (h, points) = match field.grid.tensor {
        Some((h, p)) if p >= 5 => (h, p),
        Some((_, p)) => return Err(FieldError::GridTooCoarse(format!("{p} points per axis, need at least 5"))),
        None => return Err(FieldError::GridTooCoarse("product grid is not a tensor grid".into())),
    };
    let n = field.grid.dim();
    let axes = 2 * n + 2;
    let u: Vec<f64> = field.phi.iter().zip(&field.rho).map(|(p, r)| p + r).collect();
    let interior = |i: usize| (0..axes).all(|a| (1..points - 1).contains(&((i / points.pow(a as u32)) % points)));
    let pts: Result<Vec<MaPoint>, FieldError> = (0..u.len())
        .filter(|&i| interior(i))
        .map(|i| {
            let hess = complex_hessian(&u, i, axes, points, h);
            let hess = (&hess + hess.adjoint()) * C64::new(0.5, 0.0);
            let zz = hess.view((0, 0), (n, n)).into_owned();
            let eig = zz.clone().symmetric_eigen().eigenvalues;
            let min_eig = eig.iter().copied().fold(f64::INFINITY, f64::min);
            if min_eig <= SINGULAR_FLOOR {
                return Err(FieldError::SingularXBlock { index: i, min_eigenvalue: min_eig });
            }
            let inv = zz.try_inverse().ok_or(FieldError::SingularXBlock { index: i, min_eigenvalue: min_eig })?;
            let row = hess.view((n, 0), (1, n));
            let col = hess.view((0, n), (n, 1));
            let schur = hess[(n, n)] - (row * inv * col)[(0, 0)];
            Ok(MaPoint { index: i, det: hess.determinant().re, residual: schur.re, min_z_eigenvalue: min_eig })
        })
        .collect();
    let pts = pts?;
    Ok(MaReport {
        spacing: h,
        sup_det: pts.iter().map(|p| p.det.abs()).fold(0.0, f64::max),
        sup_residual: pts.iter().map(|p| p.residual.abs()).fold(0.0, f64::max),
        min_z_eigenvalue: pts.iter().map(|p| p.min_z_eigenvalue).fold(f64::INFINITY, f64::min),
        max_inversion_residual: field.max_inversion_residual(),
        points: pts,
    })
}
