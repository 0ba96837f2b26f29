use hcma_circle::{CircleFunction, CircleGrid, C64};
use nalgebra::DMatrix;

use crate::LinearError;

pub type Mat = DMatrix<C64>;

fn hermitian_defect(m: &Mat) -> f64 {
    (m - m.adjoint()).iter().fold(0.0, |a, x| a.max(x.norm()))
}

fn symmetric_defect(m: &Mat) -> f64 {
    (m - m.transpose()).iter().fold(0.0, |a, x| a.max(x.norm()))
}

fn max_entry(m: &Mat) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.norm()))
}

/// Per-node Hermitian matrices with a recorded lower bound on the determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianField {
    mats: Vec<Mat>,
    sigma: f64,
}

impl HermitianField {
    pub fn new(mats: Vec<Mat>, sigma: f64) -> Result<Self, LinearError> {
        let dim = mats.first().map_or(0, |m| m.nrows());
        for (node, m) in mats.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(LinearError::DimensionMismatch(format!("node {node} is not {dim}x{dim}")));
            }
            let defect = hermitian_defect(m);
            if defect > 1e-12 {
                return Err(LinearError::NotHermitian { node, defect });
            }
            let det = m.determinant().re;
            if det < sigma {
                return Err(LinearError::DegenerateA { node, det, sigma });
            }
        }
        Ok(Self { mats, sigma })
    }

    pub fn constant(m: Mat, nodes: usize, sigma: f64) -> Result<Self, LinearError> {
        Self::new(vec![m; nodes], sigma)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.mats.first().map_or(0, |m| m.nrows())
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn get(&self, node: usize) -> &Mat {
        &self.mats[node]
    }
}

/// Per-node complex symmetric matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricField {
    mats: Vec<Mat>,
}

impl SymmetricField {
    pub fn new(mats: Vec<Mat>) -> Result<Self, LinearError> {
        for (node, m) in mats.iter().enumerate() {
            let defect = symmetric_defect(m);
            if defect > 1e-12 {
                return Err(LinearError::NotSymmetric { node, defect });
            }
        }
        Ok(Self { mats })
    }

    pub fn constant(m: Mat, nodes: usize) -> Result<Self, LinearError> {
        Self::new(vec![m; nodes])
    }

    pub fn zero(dim: usize, nodes: usize) -> Self {
        Self { mats: vec![Mat::zeros(dim, dim); nodes] }
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn get(&self, node: usize) -> &Mat {
        &self.mats[node]
    }
}

/// Coefficient matrices sampled per spatial node and circle node.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCoeffField {
    grid: CircleGrid,
    mats: Vec<Vec<Mat>>,
}

impl BoundaryCoeffField {
    fn checked(grid: &CircleGrid, mats: Vec<Vec<Mat>>, hermitian: bool) -> Result<Self, LinearError> {
        for (node, row) in mats.iter().enumerate() {
            if row.len() != grid.size() {
                return Err(LinearError::DimensionMismatch(format!(
                    "node {node} has {} circle samples, grid has {}",
                    row.len(),
                    grid.size()
                )));
            }
            for m in row {
                if hermitian {
                    let defect = hermitian_defect(m);
                    if defect > 1e-12 {
                        return Err(LinearError::NotHermitian { node, defect });
                    }
                } else {
                    let defect = symmetric_defect(m);
                    if defect > 1e-12 {
                        return Err(LinearError::NotSymmetric { node, defect });
                    }
                }
            }
        }
        Ok(Self { grid: grid.clone(), mats })
    }

    pub fn hermitian(grid: &CircleGrid, mats: Vec<Vec<Mat>>) -> Result<Self, LinearError> {
        Self::checked(grid, mats, true)
    }

    pub fn symmetric(grid: &CircleGrid, mats: Vec<Vec<Mat>>) -> Result<Self, LinearError> {
        Self::checked(grid, mats, false)
    }

    /// Samples `f(node, theta)` for every node and circle point.
    pub fn from_fn(
        grid: &CircleGrid,
        nodes: usize,
        hermitian: bool,
        f: impl Fn(usize, f64) -> Mat,
    ) -> Result<Self, LinearError> {
        let mats = (0..nodes).map(|w| grid.nodes().into_iter().map(|t| f(w, t)).collect()).collect();
        Self::checked(grid, mats, hermitian)
    }

    pub fn grid(&self) -> &CircleGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn node(&self, node: usize) -> &[Mat] {
        &self.mats[node]
    }

    /// Largest entry modulus of `self - base` over all nodes and circle samples.
    pub fn sup_distance(&self, base: &[Mat]) -> f64 {
        self.mats
            .iter()
            .zip(base)
            .flat_map(|(row, b)| row.iter().map(move |m| max_entry(&(m - b))))
            .fold(0.0, f64::max)
    }

    /// Circle average at every node.
    pub fn averages(&self) -> Vec<Mat> {
        self.mats
            .iter()
            .map(|row| {
                let sum = row.iter().fold(Mat::zeros(row[0].nrows(), row[0].ncols()), |acc, m| acc + m);
                sum / C64::new(row.len() as f64, 0.0)
            })
            .collect()
    }
}

/// Right-hand side `b_i(w, theta)`: per spatial node, `n` circle functions.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    grid: CircleGrid,
    nodes: Vec<Vec<CircleFunction>>,
}

impl BoundaryData {
    pub fn new(grid: &CircleGrid, nodes: Vec<Vec<CircleFunction>>) -> Result<Self, LinearError> {
        let dim = nodes.first().map_or(0, |v| v.len());
        for (w, comps) in nodes.iter().enumerate() {
            if comps.len() != dim {
                return Err(LinearError::DimensionMismatch(format!("node {w} has {} components", comps.len())));
            }
            if comps.iter().any(|f| f.grid() != grid) {
                return Err(LinearError::DimensionMismatch(format!("node {w} sampled on another grid")));
            }
        }
        Ok(Self { grid: grid.clone(), nodes })
    }

    pub fn grid(&self) -> &CircleGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.nodes.first().map_or(0, |v| v.len())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, w: usize) -> &[CircleFunction] {
        &self.nodes[w]
    }

    pub fn nodes(&self) -> &[Vec<CircleFunction>] {
        &self.nodes
    }

    pub fn sup_norm(&self) -> f64 {
        self.nodes.iter().flatten().map(|f| f.sup_norm()).fold(0.0, f64::max)
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: C64, other: &Self, beta: C64) -> Self {
        let nodes = self
            .nodes
            .iter()
            .zip(&other.nodes)
            .map(|(a, b)| a.iter().zip(b).map(|(f, g)| f.scale(alpha).add(&g.scale(beta))).collect())
            .collect();
        Self { grid: self.grid.clone(), nodes }
    }
}
