use hcma_circle::C64;
use rand::Rng;

use crate::DiscError;

/// Axis-aligned box in `C^n`, bounds taken componentwise on real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartBox {
    pub lower: Vec<C64>,
    pub upper: Vec<C64>,
}

impl ChartBox {
    pub fn new(lower: Vec<C64>, upper: Vec<C64>) -> Result<Self, DiscError> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| !(l.re < u.re && l.im < u.im)) {
            return Err(DiscError::InvalidConfig("chart box needs lower < upper in every coordinate".into()));
        }
        Ok(Self { lower, upper })
    }

    /// `[-half, half]^{2n}`.
    pub fn cube(dim: usize, half: f64) -> Self {
        Self { lower: vec![C64::new(-half, -half); dim], upper: vec![C64::new(half, half); dim] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, z: &[C64]) -> bool {
        z.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| {
            v.re >= l.re && v.re <= u.re && v.im >= l.im && v.im <= u.im
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<C64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| C64::new(rng.gen_range(l.re..u.re), rng.gen_range(l.im..u.im)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// `points` per real axis, spacing `spacing`, centred at `center`.
    Tensor { center: Vec<C64>, spacing: f64, points: usize },
    List,
}

/// Spatial nodes `w_1..w_M` in `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    pub nodes: Vec<Vec<C64>>,
    pub layout: Layout,
}

impl SpatialGrid {
    /// Tensor grid over the `2n` real axes `(Re z_1, Im z_1, ..)`; node index is
    /// the mixed-radix number with axis 0 fastest.
    pub fn tensor(center: Vec<C64>, spacing: f64, points: usize) -> Result<Self, DiscError> {
        if points == 0 || !(spacing > 0.0) || center.is_empty() {
            return Err(DiscError::InvalidConfig("tensor grid needs points >= 1, spacing > 0, n >= 1".into()));
        }
        let axes = 2 * center.len();
        let total = points.checked_pow(axes as u32).ok_or_else(|| DiscError::InvalidConfig("grid too large".into()))?;
        let mid = (points as f64 - 1.0) / 2.0;
        let nodes = (0..total)
            .map(|mut k| {
                let mut w = center.clone();
                for a in 0..axes {
                    let off = ((k % points) as f64 - mid) * spacing;
                    k /= points;
                    if a % 2 == 0 {
                        w[a / 2].re += off;
                    } else {
                        w[a / 2].im += off;
                    }
                }
                w
            })
            .collect();
        Ok(Self { nodes, layout: Layout::Tensor { center, spacing, points } })
    }

    pub fn list(nodes: Vec<Vec<C64>>) -> Result<Self, DiscError> {
        let n = nodes.first().map(|w| w.len()).unwrap_or(0);
        if n == 0 || nodes.iter().any(|w| w.len() != n) {
            return Err(DiscError::InvalidConfig("node list must be nonempty with a common dimension".into()));
        }
        Ok(Self { nodes, layout: Layout::List })
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].len()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> Option<f64> {
        match &self.layout {
            Layout::Tensor { spacing, .. } => Some(*spacing),
            Layout::List => None,
        }
    }

    /// Position of `node` along real axis `axis`, and the number of points on it.
    pub fn axis_position(&self, node: usize, axis: usize) -> Option<(usize, usize)> {
        match &self.layout {
            Layout::Tensor { points, .. } => Some(((node / points.pow(axis as u32)) % points, *points)),
            Layout::List => None,
        }
    }

    /// Node reached by moving `offset` steps along `axis`, if it exists.
    pub fn neighbor(&self, node: usize, axis: usize, offset: isize) -> Option<usize> {
        let (pos, points) = self.axis_position(node, axis)?;
        let target = pos as isize + offset;
        if target < 0 || target >= points as isize {
            return None;
        }
        let stride = points.pow(axis as u32) as isize;
        Some((node as isize + offset * stride) as usize)
    }
}
