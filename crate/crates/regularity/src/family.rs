use std::f64::consts::PI;

use hcma_circle::{hilbert_transform, CircleFunction, CircleGrid, Metric, PairScan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The cutoff vanishes identically on `[CUTOFF_END, pi]`.
pub const CUTOFF_END: f64 = 3.0;

fn flat(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// Smooth cutoff: 1 on `[0, 1]`, 0 on `[CUTOFF_END, inf)`, glued by `exp(-1/t)` splines.
pub fn cutoff(t: f64) -> f64 {
    let u = (t - 1.0) / (CUTOFF_END - 1.0);
    let (a, b) = (flat(u), flat(1.0 - u));
    1.0 - a / (a + b)
}

/// Slices `f(x_i, .)` on a common circle grid, sorted by `x`.
#[derive(Debug, Clone)]
pub struct ParamFamily {
    pub name: String,
    pub alpha: f64,
    pub xs: Vec<f64>,
    pub slices: Vec<CircleFunction>,
}

impl ParamFamily {
    pub fn from_fn(name: &str, alpha: f64, xs: Vec<f64>, grid: &CircleGrid, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let slices = xs.par_iter().map(|&x| CircleFunction::from_real_fn(grid, |t| f(x, t))).collect();
        Self { name: name.to_string(), alpha, xs, slices }
    }

    pub fn grid(&self) -> &CircleGrid {
        self.slices[0].grid()
    }

    /// Hilbert transform of every slice in theta.
    pub fn hilbert_slices(&self) -> Vec<CircleFunction> {
        self.slices.par_iter().map(hilbert_transform).collect()
    }

    /// Estimate of `sup |f| + [f]_alpha` over `(x, theta)` with the Euclidean
    /// metric (periodic in theta); pairs beyond the scan cap are sampled.
    pub fn holder_norm(&self, scan: &PairScan) -> f64 {
        let n = self.grid().size();
        let m = self.xs.len();
        let vals: Vec<Vec<f64>> = self.slices.iter().map(|s| s.real_values()).collect();
        let sup = vals.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        let theta = Metric::Periodic(2.0 * PI);
        let quotient = |i: usize, a: usize, j: usize, b: usize| {
            let dx = self.xs[i] - self.xs[j];
            let dt = theta.distance(self.grid().theta(a), self.grid().theta(b));
            let d = dx.hypot(dt);
            if d == 0.0 {
                0.0
            } else {
                (vals[i][a] - vals[j][b]).abs() / d.powf(self.alpha)
            }
        };
        let points = n * m;
        let mut best = 0.0f64;
        if points * (points - 1) / 2 <= scan.cap {
            for p in 0..points {
                for q in p + 1..points {
                    best = best.max(quotient(p / n, p % n, q / n, q % n));
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(scan.seed);
            for _ in 0..scan.cap {
                let (p, q) = (rng.gen_range(0..points), rng.gen_range(0..points));
                best = best.max(quotient(p / n, p % n, q / n, q % n));
            }
            // pairs against the x = 0 slice at equal theta carry the extremal quotients
            for i in 0..m {
                for a in 0..n {
                    best = best.max(quotient(0, a, i, a));
                }
            }
        }
        sup + best
    }
}
