use crate::{CircleFunction, CircleGrid, C64};

/// Truncated Taylor series `u(tau) = sum_{k=0}^{K} a_k tau^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphicDisc {
    coeffs: Vec<C64>,
}

/// Outcome of projecting a boundary trace onto nonnegative modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Sum of |c_m| over dropped modes (negative and above the truncation) divided by the total.
    pub dropped_mass: f64,
}

impl HolomorphicDisc {
    pub fn new(coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "a disc needs at least the constant term");
        Self { coeffs }
    }

    pub fn constant(c: C64, order: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); order + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(C64::new(0.0, 0.0), order)
    }

    /// Default truncation order for a grid: `size / 2 - 1`.
    pub fn default_order(grid: &CircleGrid) -> usize {
        grid.size() / 2 - 1
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn eval(&self, tau: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * tau + a)
    }

    pub fn eval_derivative(&self, tau: C64) -> C64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, (k, &a)| acc * tau + a * k as f64)
    }

    /// Upper bound for `|u|` on the closed disc.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).sum()
    }

    pub fn trace(&self, grid: &CircleGrid) -> CircleFunction {
        let n = grid.size();
        if self.order() < n / 2 {
            let mut c = vec![C64::new(0.0, 0.0); n];
            c[..self.coeffs.len()].copy_from_slice(&self.coeffs);
            CircleFunction::from_coeffs(grid, c).expect("length matches grid")
        } else {
            CircleFunction::from_fn(grid, |t| self.eval(C64::from_polar(1.0, t)))
        }
    }

    /// Keeps modes `0..=order` of the trace and reports what was discarded.
    pub fn from_trace(f: &CircleFunction, order: usize) -> (Self, Projection) {
        let g = f.grid();
        let keep = order.min(g.size() / 2 - 1);
        let mut coeffs = vec![C64::new(0.0, 0.0); order + 1];
        let (mut total, mut dropped) = (0.0, 0.0);
        for (j, c) in f.coeffs().iter().enumerate() {
            let m = g.mode_of_index(j);
            total += c.norm();
            if m >= 0 && m as usize <= keep {
                coeffs[m as usize] = *c;
            } else {
                dropped += c.norm();
            }
        }
        let dropped_mass = if total > 0.0 { dropped / total } else { 0.0 };
        (Self { coeffs }, Projection { dropped_mass })
    }

    /// Share of the trace's Fourier mass at negative frequencies.
    pub fn negative_mode_mass(&self, grid: &CircleGrid) -> f64 {
        let tr = self.trace(grid);
        let (mut total, mut neg) = (0.0, 0.0);
        for (j, c) in tr.coeffs().iter().enumerate() {
            total += c.norm();
            if grid.mode_of_index(j) < 0 {
                neg += c.norm();
            }
        }
        if total > 0.0 {
            neg / total
        } else {
            0.0
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = C64::new(0.0, 0.0);
        let coeffs = (0..len)
            .map(|k| {
                op(
                    *self.coeffs.get(k).unwrap_or(&zero),
                    *other.coeffs.get(k).unwrap_or(&zero),
                )
            })
            .collect();
        Self { coeffs }
    }

    /// Zeroes every mode above `cutoff`.
    pub fn truncated(&self, cutoff: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.iter_mut().skip(cutoff + 1).for_each(|a| *a = C64::new(0.0, 0.0));
        Self { coeffs }
    }

    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        self.sub(other).coeffs.iter().fold(0.0, |m, a| m.max(a.norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_derivative() {
        let d = HolomorphicDisc::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(3.0, 0.0)]);
        let t = C64::new(0.3, -0.4);
        assert!((d.eval(t) - (1.0 + C64::new(0.0, 2.0) * t + 3.0 * t * t)).norm() < 1e-15);
        assert!((d.eval_derivative(t) - (C64::new(0.0, 2.0) + 6.0 * t)).norm() < 1e-15);
        assert!(d.eval(t).norm() <= d.abs_sum());
    }

    #[test]
    fn trace_projection_round_trip() {
        let g = CircleGrid::new(32).unwrap();
        let d = HolomorphicDisc::new((0..10).map(|k| C64::new(1.0 / (k + 1) as f64, k as f64 * 0.1)).collect());
        let (back, p) = HolomorphicDisc::from_trace(&d.trace(&g), 9);
        assert!(back.max_coeff_distance(&d) < 1e-14);
        assert!(p.dropped_mass < 1e-15);
        assert!(d.negative_mode_mass(&g) < 1e-15);
    }

    #[test]
    fn projection_reports_negative_mass() {
        let g = CircleGrid::new(16).unwrap();
        let f = CircleFunction::from_real_fn(&g, |t| t.cos());
        let (d, p) = HolomorphicDisc::from_trace(&f, 7);
        assert!((p.dropped_mass - 0.5).abs() < 1e-14);
        assert!((d.coeffs()[1] - C64::new(0.5, 0.0)).norm() < 1e-15);
    }
}
