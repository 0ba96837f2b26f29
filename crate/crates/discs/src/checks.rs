use std::f64::consts::PI;

use hcma_circle::{CircleGrid, HolomorphicDisc, PairScan, C64};
use hcma_linear::NodeSolution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{fd_derivatives, ChartBox, DiscError, DiscFamily, Potential, SpatialGrid, Translation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallnessReport {
    pub sup_norm: f64,
    pub holder_seminorm: f64,
    pub alpha: f64,
    /// `sup_norm + holder_seminorm`, compared against `threshold`.
    pub norm: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub samples: usize,
}

/// Default threshold for [`smallness_check`].
pub const SMALLNESS_THRESHOLD: f64 = 0.1;

/// Estimates the Hölder-`alpha` norm of `dPsi - drho` over the chart times the circle.
/// Samples 64 random chart points (seeded) against 32 angles.
pub fn smallness_check(
    pot: &dyn Potential,
    rho: &dyn Potential,
    chart: &ChartBox,
    alpha: f64,
    threshold: f64,
    seed: u64,
) -> SmallnessReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zs: Vec<Vec<C64>> = (0..64).map(|_| chart.sample(&mut rng)).collect();
    let thetas: Vec<f64> = (0..32).map(|j| 2.0 * PI * j as f64 / 32.0).collect();
    let mut pts = Vec::with_capacity(zs.len() * thetas.len());
    for z in &zs {
        for &t in &thetas {
            let d: Vec<C64> = pot.grad(z, t).into_iter().zip(rho.grad(z, 0.0)).map(|(a, b)| a - b).collect();
            pts.push((z.clone(), t, d));
        }
    }
    let sup_norm = pts.iter().flat_map(|p| p.2.iter().map(|v| v.norm())).fold(0.0, f64::max);
    let quotient = |p: usize, q: usize| {
        let (a, b) = (&pts[p], &pts[q]);
        let dt = (a.1 - b.1).abs();
        let dt = dt.min(2.0 * PI - dt);
        let dz: f64 = a.0.iter().zip(&b.0).map(|(x, y)| (x - y).norm_sqr()).sum();
        let dist = (dz + dt * dt).sqrt();
        if dist == 0.0 {
            return 0.0;
        }
        let diff = a.2.iter().zip(&b.2).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        diff / dist.powf(alpha)
    };
    let scan = PairScan::default();
    let m = pts.len();
    let mut semi = 0.0f64;
    if m * (m - 1) / 2 <= scan.cap {
        for p in 0..m {
            for q in p + 1..m {
                semi = semi.max(quotient(p, q));
            }
        }
    } else {
        let mut r = ChaCha8Rng::seed_from_u64(scan.seed);
        for _ in 0..scan.cap {
            semi = semi.max(quotient(r.gen_range(0..m), r.gen_range(0..m)));
        }
    }
    let norm = sup_norm + semi;
    SmallnessReport {
        sup_norm,
        holder_seminorm: semi,
        alpha,
        norm,
        threshold,
        verdict: if norm <= threshold { Verdict::Pass } else { Verdict::Warn },
        samples: m,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeReport {
    /// Largest entry of `d dbar h` by finite differences.
    pub pluriharmonic_defect: f64,
    pub z_difference: f64,
    /// `sup |xi' - xi - dh(z)|`.
    pub xi_difference: f64,
    pub passed: bool,
}

pub const GAUGE_TOLERANCE: f64 = 1e-7;

/// Compares a family solved with `rho` against one solved with `rho + h`.
pub fn gauge_shift_check(
    base: &DiscFamily,
    shifted: &DiscFamily,
    h: &dyn Potential,
    chart: &ChartBox,
    seed: u64,
) -> Result<GaugeReport, DiscError> {
    if base.len() != shifted.len() || base.grid != shifted.grid {
        return Err(DiscError::InvalidConfig("families live on different grids".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut defect = 0.0f64;
    for _ in 0..32 {
        let z = chart.sample(&mut rng);
        let theta = rng.gen_range(0.0..2.0 * PI);
        let (_, mixed, _) = fd_derivatives(|q| h.value(q, theta), &z, 1e-3);
        defect = defect.max(mixed.camax());
    }
    if defect > 1e-6 {
        return Err(DiscError::NotSameForm(defect));
    }
    let grid = &base.grid;
    let (mut dz, mut dxi) = (0.0f64, 0.0f64);
    for k in 0..base.len() {
        let (za, zb) = (base.z_trace(k), shifted.z_trace(k));
        let (xa, xb) = (base.xi_trace(k), shifted.xi_trace(k));
        for j in 0..grid.size() {
            let z: Vec<C64> = zb.iter().map(|f| f.value(j)).collect();
            let g = h.grad(&z, grid.theta(j));
            for i in 0..z.len() {
                dz = dz.max((za[i].value(j) - zb[i].value(j)).norm());
                dxi = dxi.max((xb[i].value(j) - xa[i].value(j) - g[i]).norm());
            }
        }
    }
    Ok(GaugeReport {
        pluriharmonic_defect: defect,
        z_difference: dz,
        xi_difference: dxi,
        passed: dz <= GAUGE_TOLERANCE && dxi <= GAUGE_TOLERANCE,
    })
}

impl Translation {
    /// Exact discs at `w`: `z = w + eps sigma(tau)`, `xi = conj(w)`.
    pub fn exact_node(&self, w: &[C64], order: usize) -> NodeSolution {
        let z = w
            .iter()
            .zip(&self.sigma)
            .map(|(&v, s)| {
                let mut c = vec![C64::new(0.0, 0.0); order + 1];
                c[0] = v;
                for (k, a) in s.iter().enumerate() {
                    c[k] += a * self.eps;
                }
                HolomorphicDisc::new(c)
            })
            .collect();
        let xi = w.iter().map(|v| HolomorphicDisc::constant(v.conj(), order)).collect();
        NodeSolution { z, xi, dropped_mass: 0.0 }
    }

    pub fn exact_family(&self, spatial: &SpatialGrid, grid: &CircleGrid) -> DiscFamily {
        let order = HolomorphicDisc::default_order(grid);
        DiscFamily { grid: grid.clone(), spatial: spatial.clone(), nodes: spatial.nodes.iter().map(|w| self.exact_node(w, order)).collect() }
    }
}
