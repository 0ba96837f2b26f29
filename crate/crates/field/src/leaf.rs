use hcma_circle::{CircleFunction, CircleGrid, C64};
use hcma_discs::{foliation_samples, ChartBox, DiscFamily, Layout, Potential, SpatialGrid};
use hcma_linear::NodeSolution;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::{boundary_value, harmonic_at, FieldError};

/// Full potential `u(w, tau)` along every leaf of a disc family, stored as its
/// boundary trace `Psi(z(w, theta), theta)`.
#[derive(Debug, Clone)]
pub struct LeafField {
    pub family: DiscFamily,
    pub boundary: Vec<CircleFunction>,
    /// `rho(z(w, theta)) - rho(w)` on the circle.
    pub error_term: Vec<CircleFunction>,
}

/// `Psi(z(theta), theta)` on the circle for one node.
pub(crate) fn leaf_trace(
    node: usize,
    sol: &NodeSolution,
    grid: &CircleGrid,
    pot: &dyn Potential,
    chart: &ChartBox,
) -> Result<CircleFunction, FieldError> {
    let zt: Vec<Vec<C64>> = sol.z.iter().map(|d| d.trace(grid).samples().to_vec()).collect();
    let mut vals = Vec::with_capacity(grid.size());
    for j in 0..grid.size() {
        let z: Vec<C64> = zt.iter().map(|c| c[j]).collect();
        if !chart.contains(&z) {
            return Err(FieldError::LeftChart { node, theta: grid.theta(j), point: z });
        }
        vals.push(pot.value(&z, grid.theta(j)));
    }
    Ok(CircleFunction::from_real(grid, &vals)?)
}

pub fn reconstruct_on_leaves(
    fam: &DiscFamily,
    pot: &dyn Potential,
    rho: &dyn Potential,
    chart: &ChartBox,
) -> Result<LeafField, FieldError> {
    let grid = &fam.grid;
    let per_node: Result<Vec<(CircleFunction, CircleFunction)>, FieldError> = (0..fam.len())
        .into_par_iter()
        .map(|k| {
            let u = leaf_trace(k, &fam.nodes[k], grid, pot, chart)?;
            let base = rho.value(&fam.spatial.nodes[k], 0.0);
            let e: Vec<f64> = leaf_trace(k, &fam.nodes[k], grid, rho, chart)?.real_values().iter().map(|v| v - base).collect();
            let e = CircleFunction::from_real(grid, &e)?;
            Ok((u, e))
        })
        .collect();
    let (boundary, error_term) = per_node?.into_iter().unzip();
    Ok(LeafField { family: fam.clone(), boundary, error_term })
}

impl LeafField {
    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    /// `u(w_node, tau)` for `|tau| <= 1`.
    pub fn u_at(&self, node: usize, tau: C64) -> Result<f64, FieldError> {
        harmonic_at(&self.boundary[node], tau)
    }

    /// Relative potential `u - rho` at the leaf point `(z(w_node, tau), tau)`.
    pub fn phi_at(&self, node: usize, tau: C64, rho: &dyn Potential) -> Result<f64, FieldError> {
        Ok(self.u_at(node, tau)? - rho.value(&self.family.z_at(node, tau), 0.0))
    }

    /// Largest gap between the stored trace, re-synthesised at the grid
    /// angles, and `Psi` evaluated on the leaf boundary.
    pub fn trace_error(&self, pot: &dyn Potential) -> f64 {
        let grid = &self.family.grid;
        let mut worst = 0.0f64;
        for (k, f) in self.boundary.iter().enumerate() {
            let zt = self.family.z_trace(k);
            for j in 0..grid.size() {
                let z: Vec<C64> = zt.iter().map(|c| c.value(j)).collect();
                let direct = pot.value(&z, grid.theta(j));
                worst = worst.max((boundary_value(f, grid.theta(j)).re - direct).abs());
            }
        }
        worst
    }

    /// Largest `|Phi_self - Phi_other|` over shared leaves at `taus`.
    pub fn phi_distance(
        &self,
        rho: &dyn Potential,
        other: &LeafField,
        other_rho: &dyn Potential,
        taus: &[C64],
    ) -> Result<f64, FieldError> {
        let mut worst = 0.0f64;
        for k in 0..self.len().min(other.len()) {
            for &t in taus {
                worst = worst.max((self.phi_at(k, t, rho)? - other.phi_at(k, t, other_rho)?).abs());
            }
        }
        Ok(worst)
    }
}

/// Second-order difference weights (already divided by the spacing) along
/// one real axis; one-sided at the edges.
pub(crate) fn axis_stencil(spatial: &SpatialGrid, k: usize, axis: usize) -> Option<[(usize, f64); 3]> {
    let (pos, points) = spatial.axis_position(k, axis)?;
    let h = spatial.spacing()?;
    if points < 3 {
        return None;
    }
    let (w, off): ([f64; 3], [isize; 3]) = if pos == 0 {
        ([-1.5, 2.0, -0.5], [0, 1, 2])
    } else if pos == points - 1 {
        ([1.5, -2.0, 0.5], [0, -1, -2])
    } else {
        ([-0.5, 0.0, 0.5], [-1, 0, 1])
    };
    let at = |s: usize| (spatial.neighbor(k, axis, off[s]).expect("in range"), w[s] / h);
    Some([at(0), at(1), at(2)])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub spacing: f64,
    /// `sup |d_z u (z(w, tau), tau) - xi(w, tau)|`.
    pub sup_error: f64,
    pub worst_node: usize,
    pub samples: usize,
}

/// Compares `d_z u` at leaf points, obtained by the chain rule from
/// differences across neighbouring leaves, with `xi`.
pub fn derivative_identity_check(leaf: &LeafField) -> Result<DerivativeReport, FieldError> {
    let fam = &leaf.family;
    let spacing = match fam.spatial.layout {
        Layout::Tensor { spacing, points, .. } if points >= 3 => spacing,
        Layout::Tensor { points, .. } => {
            return Err(FieldError::GridTooCoarse(format!("{points} points per axis, need at least 3")))
        }
        Layout::List => return Err(FieldError::GridTooCoarse("spatial nodes are not a tensor grid".into())),
    };
    let n = fam.dim();
    let taus = foliation_samples();
    let cache: Result<Vec<Vec<(f64, Vec<f64>)>>, FieldError> = (0..fam.len())
        .into_par_iter()
        .map(|k| {
            taus.iter()
                .map(|&t| {
                    let z: Vec<f64> = fam.z_at(k, t).iter().flat_map(|v| [v.re, v.im]).collect();
                    Ok((leaf.u_at(k, t)?, z))
                })
                .collect()
        })
        .collect();
    let cache = cache?;
    let errors: Vec<f64> = (0..fam.len())
        .into_par_iter()
        .map(|k| {
            let stencils: Vec<[(usize, f64); 3]> =
                (0..2 * n).map(|a| axis_stencil(&fam.spatial, k, a).expect("tensor grid")).collect();
            let mut worst = 0.0f64;
            for (t, &tau) in taus.iter().enumerate() {
                let mut jac = DMatrix::<f64>::zeros(2 * n, 2 * n);
                let mut gw = DVector::<f64>::zeros(2 * n);
                for (a, st) in stencils.iter().enumerate() {
                    for &(m, wt) in st {
                        gw[a] += wt * cache[m][t].0;
                        for r in 0..2 * n {
                            jac[(r, a)] += wt * cache[m][t].1[r];
                        }
                    }
                }
                let Some(gz) = jac.transpose().lu().solve(&gw) else {
                    return f64::INFINITY;
                };
                let xi = fam.xi_at(k, tau);
                for i in 0..n {
                    let d = 0.5 * C64::new(gz[2 * i], -gz[2 * i + 1]);
                    worst = worst.max((d - xi[i]).norm());
                }
            }
            worst
        })
        .collect();
    let (worst_node, sup_error) =
        errors.iter().copied().enumerate().fold((0, 0.0f64), |b, (k, e)| if e > b.1 { (k, e) } else { b });
    Ok(DerivativeReport { spacing, sup_error, worst_node, samples: errors.len() * taus.len() })
}
