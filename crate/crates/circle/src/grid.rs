use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::{Fft, FftPlanner};

use crate::{CircleError, C64};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(size: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|p| p.into_inner());
    map.entry(size)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(size), planner.plan_fft_inverse(size))
        })
        .clone()
}

/// Equispaced nodes `theta_j = 2 pi j / size` on the unit circle.
///
/// The size is a power of two of at least 8, so the node `3 size / 4`
/// (`tau = -i`) always exists. That node carries the fixed-point anchor.
#[derive(Clone)]
pub struct CircleGrid {
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for CircleGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleGrid").field("size", &self.size).finish()
    }
}

impl PartialEq for CircleGrid {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
    }
}

impl CircleGrid {
    pub fn new(size: usize) -> Result<Self, CircleError> {
        if size < 8 || !size.is_power_of_two() {
            return Err(CircleError::InvalidSize(size));
        }
        let (fwd, inv) = plans(size);
        Ok(Self { size, fwd, inv })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.size as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.size as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.size).map(|j| self.theta(j)).collect()
    }

    /// Boundary points `e^{i theta_j}`.
    pub fn points(&self) -> Vec<C64> {
        (0..self.size).map(|j| C64::from_polar(1.0, self.theta(j))).collect()
    }

    /// Index of the node at `theta = 3 pi / 2`.
    pub fn anchor_index(&self) -> usize {
        3 * self.size / 4
    }

    /// Node closest to `theta` (taken mod 2 pi).
    pub fn nearest_index(&self, theta: f64) -> usize {
        let t = theta.rem_euclid(TAU);
        ((t / self.spacing()).round() as usize) % self.size
    }

    /// Signed frequency stored at FFT slot `j`; the Nyquist slot reads as `-size/2`.
    pub fn mode_of_index(&self, j: usize) -> i64 {
        if j < self.size / 2 {
            j as i64
        } else {
            j as i64 - self.size as i64
        }
    }

    pub fn index_of_mode(&self, m: i64) -> usize {
        m.rem_euclid(self.size as i64) as usize
    }

    /// Fourier coefficients `c_m = (1/N) sum_j f_j e^{-i m theta_j}` in FFT order.
    pub(crate) fn analyze(&self, samples: &[C64]) -> Vec<C64> {
        let mut buf = samples.to_vec();
        self.fwd.process(&mut buf);
        let s = 1.0 / self.size as f64;
        buf.iter_mut().for_each(|c| *c *= s);
        buf
    }

    pub(crate) fn synthesize(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut buf = coeffs.to_vec();
        self.inv.process(&mut buf);
        buf
    }
}
