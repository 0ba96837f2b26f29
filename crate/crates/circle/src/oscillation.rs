//! Oscillation estimators on sampled functions.
//!
//! BMO uses the dyadic arc family only: arcs of `N / 2^k` nodes for
//! `k = 0..log2 N - 2`, at every rotation by a grid node. Relative to the
//! all-arcs norm this costs a comparability factor of at most 4.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{CircleFunction, C64};

/// How distances between sample points are measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Line,
    Periodic(f64),
}

impl Metric {
    pub fn distance(self, a: f64, b: f64) -> f64 {
        match self {
            Metric::Line => (a - b).abs(),
            Metric::Periodic(p) => {
                let d = (a - b).rem_euclid(p);
                d.min(p - d)
            }
        }
    }
}

/// Pair-scan budget: all pairs up to `cap`, otherwise `cap` seeded random pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScan {
    pub cap: usize,
    pub seed: u64,
}

impl Default for PairScan {
    fn default() -> Self {
        Self { cap: 2_000_000, seed: 0x5eed }
    }
}

/// `sup |f(p) - f(q)|` over sampled pairs with `d(p, q) <= t`.
pub fn modulus_of_continuity(points: &[f64], values: &[f64], metric: Metric, t: f64) -> f64 {
    assert_eq!(points.len(), values.len());
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
    let mut best = 0.0f64;
    for i in 0..n {
        let (pi, vi) = (points[order[i]], values[order[i]]);
        for step in 1..n {
            let j = i + step;
            let idx = match metric {
                Metric::Line if j >= n => break,
                Metric::Line => order[j],
                Metric::Periodic(_) => order[j % n],
            };
            let forward = match metric {
                Metric::Line => points[idx] - pi,
                Metric::Periodic(p) => (points[idx] - pi).rem_euclid(p),
            };
            if forward > t {
                break;
            }
            best = best.max((values[idx] - vi).abs());
        }
    }
    best
}

/// Largest mean oscillation among the dyadic arcs of one length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcOscillation {
    pub nodes: usize,
    pub arc_length: f64,
    pub max_oscillation: f64,
}

/// Per-length maxima of the mean oscillation over rotated dyadic arcs.
pub fn bmo_profile(values: &[f64]) -> Vec<ArcOscillation> {
    let n = values.len();
    assert!(n >= 4 && n.is_power_of_two(), "dyadic arcs need a power-of-two grid");
    let mut prefix = Vec::with_capacity(2 * n + 1);
    prefix.push(0.0);
    for j in 0..2 * n {
        prefix.push(prefix[j] + values[j % n]);
    }
    let levels = n.trailing_zeros() as usize - 1;
    (0..levels)
        .map(|k| {
            let len = n >> k;
            let starts = if k == 0 { 1 } else { n };
            let mut worst = 0.0f64;
            for s in 0..starts {
                let mean = (prefix[s + len] - prefix[s]) / len as f64;
                let osc: f64 = (s..s + len).map(|j| (values[j % n] - mean).abs()).sum::<f64>() / len as f64;
                worst = worst.max(osc);
            }
            ArcOscillation {
                nodes: len,
                arc_length: std::f64::consts::TAU * len as f64 / n as f64,
                max_oscillation: worst,
            }
        })
        .collect()
}

pub fn bmo_of_values(values: &[f64]) -> f64 {
    bmo_profile(values).iter().fold(0.0, |m, a| m.max(a.max_oscillation))
}

/// Dyadic BMO norm of the real part of `f`.
pub fn bmo_norm(f: &CircleFunction) -> f64 {
    bmo_of_values(&f.real_values())
}

/// Normalized measure of `{theta : |f - mean f| > lambda}`.
pub fn jn_tail(f: &CircleFunction, lambda: f64) -> f64 {
    let v = f.real_values();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().filter(|x| (*x - mean).abs() > lambda).count() as f64 / v.len() as f64
}

fn pair_scan(points: &[f64], values: &[f64], metric: Metric, alpha: f64, scan: &PairScan) -> f64 {
    let n = points.len();
    let quotient = |i: usize, j: usize| {
        let d = metric.distance(points[i], points[j]);
        if d == 0.0 {
            0.0
        } else {
            (values[i] - values[j]).abs() / d.powf(alpha)
        }
    };
    let total = n * n.saturating_sub(1) / 2;
    if total <= scan.cap {
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(quotient(i, j));
            }
        }
        best
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(scan.seed);
        (0..scan.cap).fold(0.0f64, |best, _| {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            best.max(quotient(i, j))
        })
    }
}

/// Hölder-`alpha` seminorm of the `k`-th derivative, spectral in theta.
pub fn holder_seminorm_circle(f: &CircleFunction, alpha: f64, k: u32, scan: &PairScan) -> f64 {
    let g = f.grid();
    let n = g.size() as i64;
    let df = if k == 0 {
        f.clone()
    } else {
        let coeffs = f
            .coeffs()
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let m = g.mode_of_index(j);
                if m == -n / 2 && k % 2 == 1 {
                    C64::new(0.0, 0.0)
                } else {
                    c * C64::new(0.0, m as f64).powu(k)
                }
            })
            .collect();
        CircleFunction::from_coeffs(g, coeffs).expect("same grid")
    };
    pair_scan(&g.nodes(), &df.real_values(), Metric::Periodic(std::f64::consts::TAU), alpha, scan)
}

/// Hölder-`alpha` seminorm of the `k`-th derivative on a sorted line grid,
/// derivatives by centered divided differences (the domain shrinks by one node per side per order).
pub fn holder_seminorm_line(xs: &[f64], ys: &[f64], alpha: f64, k: u32, scan: &PairScan) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (mut x, mut y) = (xs.to_vec(), ys.to_vec());
    for _ in 0..k {
        if x.len() < 3 {
            return 0.0;
        }
        let d: Vec<f64> = (1..x.len() - 1).map(|i| (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1])).collect();
        x = x[1..x.len() - 1].to_vec();
        y = d;
    }
    pair_scan(&x, &y, Metric::Line, alpha, scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CircleGrid;
    use std::f64::consts::PI;

    /// Direct definition: every dyadic arc, mean recomputed from scratch.
    fn brute_bmo(v: &[f64]) -> f64 {
        let n = v.len();
        let mut best = 0.0f64;
        let mut len = n;
        while len >= 4 {
            for s in 0..n {
                let arc: Vec<f64> = (0..len).map(|i| v[(s + i) % n]).collect();
                let mean = arc.iter().sum::<f64>() / len as f64;
                let osc = arc.iter().map(|x| (x - mean).abs()).sum::<f64>() / len as f64;
                best = best.max(osc);
            }
            len /= 2;
        }
        best
    }

    fn step(g: &CircleGrid) -> CircleFunction {
        CircleFunction::from_real_fn(g, |t| if t < PI { 1.0 } else { -1.0 })
    }

    #[test]
    fn bmo_examples() {
        let g = CircleGrid::new(256).unwrap();
        assert_eq!(bmo_norm(&CircleFunction::from_real_fn(&g, |_| 3.0)), 0.0);
        let s = step(&g);
        assert!((bmo_norm(&s) - 1.0).abs() < 1e-14);
        assert!((brute_bmo(&s.real_values()) - 1.0).abs() < 1e-14);
        let c256 = bmo_norm(&CircleFunction::from_real_fn(&g, f64::cos));
        let c1024 = bmo_norm(&CircleFunction::from_real_fn(&CircleGrid::new(1024).unwrap(), f64::cos));
        assert!(c256 > 0.0 && c256 < 1.0);
        assert!((c256 - c1024).abs() / c1024 < 0.02);
        let v = CircleFunction::from_real_fn(&g, |t| (3.0 * t).sin() + (t * t).cos()).real_values();
        assert!((bmo_of_values(&v) - brute_bmo(&v)).abs() < 1e-13);
    }

    #[test]
    fn jn_tail_examples() {
        let g = CircleGrid::new(64).unwrap();
        assert_eq!(jn_tail(&CircleFunction::zero(&g), 1.0), 0.0);
        assert_eq!(jn_tail(&step(&g), 0.5), 1.0);
    }

    #[test]
    fn modulus_examples() {
        let xs: Vec<f64> = (0..=100).map(|i| PI * i as f64 / 100.0).collect();
        assert_eq!(modulus_of_continuity(&xs, &vec![2.0; xs.len()], Metric::Line, 0.1), 0.0);
        let w = modulus_of_continuity(&xs, &xs, Metric::Line, 0.1);
        assert!((w - 3.0 * PI / 100.0).abs() < 1e-12 && w <= 0.1);
        let g = CircleGrid::new(128).unwrap();
        let f = CircleFunction::from_real_fn(&g, f64::cos);
        let mut last = 0.0;
        for t in [0.01, 0.05, 0.1, 0.5, 1.0, 3.0, 4.0] {
            let w = modulus_of_continuity(&g.nodes(), &f.real_values(), Metric::Periodic(2.0 * PI), t);
            assert!(w >= last);
            last = w;
        }
        assert!((last - 2.0).abs() < 1e-12);
    }

    #[test]
    fn holder_examples() {
        let g = CircleGrid::new(512).unwrap();
        let scan = PairScan::default();
        assert_eq!(holder_seminorm_circle(&CircleFunction::from_real_fn(&g, |_| 1.0), 0.5, 0, &scan), 0.0);
        let c = holder_seminorm_circle(&CircleFunction::from_real_fn(&g, f64::cos), 0.5, 0, &scan);
        assert!(c > 0.5 && c <= 2.0, "{c}");
        let xs: Vec<f64> = (0..=400).map(|i| -1.0 + i as f64 / 200.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.abs().sqrt()).collect();
        let h = holder_seminorm_line(&xs, &ys, 0.5, 0, &scan);
        assert!((h - 1.0).abs() < 0.05, "{h}");
        // first derivative of sin is cos, whose Lipschitz constant is 1
        let s = CircleFunction::from_real_fn(&g, f64::sin);
        let l = holder_seminorm_circle(&s, 1.0, 1, &scan);
        assert!((l - 1.0).abs() < 1e-3, "{l}");
    }
}
