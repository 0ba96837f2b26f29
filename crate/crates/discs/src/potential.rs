use std::sync::Arc;

use hcma_circle::C64;
use hcma_linear::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ChartBox;

/// Real boundary potential `Psi(z, theta)` on `C^n x S^1` with analytic Wirtinger derivatives.
/// A reference potential is the same thing with `theta` ignored.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, z: &[C64], theta: f64) -> f64;
    /// `dPsi/dz_i`.
    fn grad(&self, z: &[C64], theta: f64) -> Vec<C64>;
    /// `d^2 Psi / dz_i dzbar_j`, Hermitian.
    fn hess_mixed(&self, z: &[C64], theta: f64) -> Mat;
    /// `d^2 Psi / dz_i dz_j`, symmetric.
    fn hess_holo(&self, z: &[C64], theta: f64) -> Mat;

    /// Real `2n x 2n` Hessian in `(x_1, y_1, .., x_n, y_n)`.
    fn real_hessian(&self, z: &[C64], theta: f64) -> nalgebra::DMatrix<f64> {
        let (h, s) = (self.hess_mixed(z, theta), self.hess_holo(z, theta));
        let n = self.dim();
        nalgebra::DMatrix::from_fn(2 * n, 2 * n, |a, b| {
            let (i, j) = (a / 2, b / 2);
            let (hs, ss) = (h[(i, j)], s[(i, j)]);
            match (a % 2, b % 2) {
                (0, 0) => 2.0 * (ss.re + hs.re),
                (1, 1) => 2.0 * (hs.re - ss.re),
                (0, 1) => 2.0 * (hs.im - ss.im),
                _ => -2.0 * (ss.im + hs.im),
            }
        })
    }
}

pub type SharedPotential = Arc<dyn Potential>;

fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// `|z|^2`.
#[derive(Debug, Clone)]
pub struct Euclidean {
    pub dim: usize,
}

impl Potential for Euclidean {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, z: &[C64], _: f64) -> f64 {
        z.iter().map(|v| v.norm_sqr()).sum()
    }

    fn grad(&self, z: &[C64], _: f64) -> Vec<C64> {
        z.iter().map(|v| v.conj()).collect()
    }

    fn hess_mixed(&self, _: &[C64], _: f64) -> Mat {
        identity(self.dim)
    }

    fn hess_holo(&self, _: &[C64], _: f64) -> Mat {
        Mat::zeros(self.dim, self.dim)
    }
}

/// `|z - eps sigma(tau)|^2` with `sigma_i` a polynomial in `tau = e^{i theta}`.
#[derive(Debug, Clone)]
pub struct Translation {
    pub eps: f64,
    /// Taylor coefficients of each component of `sigma`.
    pub sigma: Vec<Vec<C64>>,
}

impl Translation {
    pub fn new(eps: f64, sigma: Vec<Vec<C64>>) -> Self {
        Self { eps, sigma }
    }

    /// `sigma(tau) = (tau + i) / 2` in every component.
    pub fn standard(eps: f64, dim: usize) -> Self {
        Self::new(eps, vec![vec![C64::new(0.0, 0.5), C64::new(0.5, 0.0)]; dim])
    }

    pub fn sigma_at(&self, tau: C64) -> Vec<C64> {
        self.sigma.iter().map(|c| c.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * tau + a)).collect()
    }

    fn shift(&self, theta: f64) -> Vec<C64> {
        self.sigma_at(C64::from_polar(1.0, theta)).into_iter().map(|s| s * self.eps).collect()
    }
}

impl Potential for Translation {
    fn dim(&self) -> usize {
        self.sigma.len()
    }

    fn value(&self, z: &[C64], theta: f64) -> f64 {
        z.iter().zip(self.shift(theta)).map(|(a, s)| (a - s).norm_sqr()).sum()
    }

    fn grad(&self, z: &[C64], theta: f64) -> Vec<C64> {
        z.iter().zip(self.shift(theta)).map(|(a, s)| (a - s).conj()).collect()
    }

    fn hess_mixed(&self, _: &[C64], _: f64) -> Mat {
        identity(self.dim())
    }

    fn hess_holo(&self, _: &[C64], _: f64) -> Mat {
        Mat::zeros(self.dim(), self.dim())
    }
}

/// `|z|^2 + eps (c0 + c1 cos theta + s1 sin theta) (|z|^2)^2`.
#[derive(Debug, Clone)]
pub struct Quartic {
    pub dim: usize,
    pub eps: f64,
    /// `[c0, c1, s1]`.
    pub coefficients: [f64; 3],
}

impl Quartic {
    pub const DEFAULT_COEFFICIENTS: [f64; 3] = [1.0, 0.5, 0.5];

    pub fn new(dim: usize, eps: f64) -> Self {
        Self { dim, eps, coefficients: Self::DEFAULT_COEFFICIENTS }
    }

    fn weight(&self, theta: f64) -> f64 {
        let [c0, c1, s1] = self.coefficients;
        self.eps * (c0 + c1 * theta.cos() + s1 * theta.sin())
    }
}

impl Potential for Quartic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, z: &[C64], theta: f64) -> f64 {
        let s: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        s + self.weight(theta) * s * s
    }

    fn grad(&self, z: &[C64], theta: f64) -> Vec<C64> {
        let s: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        let k = 1.0 + 2.0 * self.weight(theta) * s;
        z.iter().map(|v| v.conj() * k).collect()
    }

    fn hess_mixed(&self, z: &[C64], theta: f64) -> Mat {
        let s: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        let e = self.weight(theta);
        Mat::from_fn(self.dim, self.dim, |i, j| {
            let diag = if i == j { 1.0 + 2.0 * e * s } else { 0.0 };
            C64::new(diag, 0.0) + 2.0 * e * z[i].conj() * z[j]
        })
    }

    fn hess_holo(&self, z: &[C64], theta: f64) -> Mat {
        let e = self.weight(theta);
        Mat::from_fn(self.dim, self.dim, |i, j| 2.0 * e * z[i].conj() * z[j].conj())
    }
}

/// `base + gauge`; the gauge is meant to be pluriharmonic.
#[derive(Clone)]
pub struct GaugeShifted {
    pub base: SharedPotential,
    pub gauge: SharedPotential,
}

impl Potential for GaugeShifted {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, z: &[C64], theta: f64) -> f64 {
        self.base.value(z, theta) + self.gauge.value(z, theta)
    }

    fn grad(&self, z: &[C64], theta: f64) -> Vec<C64> {
        self.base.grad(z, theta).into_iter().zip(self.gauge.grad(z, theta)).map(|(a, b)| a + b).collect()
    }

    fn hess_mixed(&self, z: &[C64], theta: f64) -> Mat {
        self.base.hess_mixed(z, theta) + self.gauge.hess_mixed(z, theta)
    }

    fn hess_holo(&self, z: &[C64], theta: f64) -> Mat {
        self.base.hess_holo(z, theta) + self.gauge.hess_holo(z, theta)
    }
}

/// Wirtinger derivatives of `f` by centered differences with step `h`:
/// gradient, `d dbar` and `d d` matrices.
pub fn fd_derivatives(f: impl Fn(&[C64]) -> f64, z: &[C64], h: f64) -> (Vec<C64>, Mat, Mat) {
    let n = z.len();
    let unit = |k: usize| if k % 2 == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
    let at = |moves: &[(usize, f64)]| {
        let mut p = z.to_vec();
        for &(k, s) in moves {
            p[k / 2] += unit(k) * s;
        }
        f(&p)
    };
    let d1 = |k: usize| (at(&[(k, h)]) - at(&[(k, -h)])) / (2.0 * h);
    let d2 = |a: usize, b: usize| {
        if a == b {
            (at(&[(a, h)]) - 2.0 * at(&[]) + at(&[(a, -h)])) / (h * h)
        } else {
            (at(&[(a, h), (b, h)]) - at(&[(a, h), (b, -h)]) - at(&[(a, -h), (b, h)]) + at(&[(a, -h), (b, -h)])) / (4.0 * h * h)
        }
    };
    let i = C64::new(0.0, 1.0);
    let grad = (0..n).map(|k| 0.5 * (d1(2 * k) - i * d1(2 * k + 1))).collect();
    let real = nalgebra::DMatrix::from_fn(2 * n, 2 * n, |a, b| d2(a, b));
    let mixed = Mat::from_fn(n, n, |p, q| {
        let (xx, yy) = (real[(2 * p, 2 * q)], real[(2 * p + 1, 2 * q + 1)]);
        let (xy, yx) = (real[(2 * p, 2 * q + 1)], real[(2 * p + 1, 2 * q)]);
        0.25 * (C64::new(xx + yy, 0.0) + i * (xy - yx))
    });
    let holo = Mat::from_fn(n, n, |p, q| {
        let (xx, yy) = (real[(2 * p, 2 * q)], real[(2 * p + 1, 2 * q + 1)]);
        let (xy, yx) = (real[(2 * p, 2 * q + 1)], real[(2 * p + 1, 2 * q)]);
        0.25 * (C64::new(xx - yy, 0.0) - i * (xy + yx))
    });
    (grad, mixed, holo)
}

/// Analytic derivatives against centered differences at random points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub samples: usize,
    pub step: f64,
    pub grad_error: f64,
    pub hessian_error: f64,
    pub hermitian_defect: f64,
    pub min_det: f64,
}

pub fn consistency_check(p: &dyn Potential, chart: &ChartBox, samples: usize, seed: u64) -> ConsistencyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = 1e-4;
    let mut r = ConsistencyReport { samples, step, grad_error: 0.0, hessian_error: 0.0, hermitian_defect: 0.0, min_det: f64::INFINITY };
    for _ in 0..samples {
        let z = chart.sample(&mut rng);
        let theta = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let (g, m, s) = fd_derivatives(|q| p.value(q, theta), &z, step);
        let ag = p.grad(&z, theta);
        let (am, as_) = (p.hess_mixed(&z, theta), p.hess_holo(&z, theta));
        r.grad_error = g.iter().zip(&ag).map(|(a, b)| (a - b).norm()).fold(r.grad_error, f64::max);
        r.hessian_error = r.hessian_error.max((&m - &am).camax()).max((&s - &as_).camax());
        r.hermitian_defect = r.hermitian_defect.max((&am - am.adjoint()).camax());
        r.min_det = r.min_det.min(am.determinant().re);
    }
    r
}
