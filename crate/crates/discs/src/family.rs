use std::io::Write;

use hcma_circle::{CircleFunction, CircleGrid, HolomorphicDisc, C64};
use hcma_linear::NodeSolution;

use crate::{Potential, SpatialGrid};

/// Holomorphic discs `(z, xi)(w, .)` over a spatial grid, as truncated Taylor series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscFamily {
    pub grid: CircleGrid,
    pub spatial: SpatialGrid,
    pub nodes: Vec<NodeSolution>,
}

impl DiscFamily {
    pub fn dim(&self) -> usize {
        self.spatial.dim()
    }

    pub fn order(&self) -> usize {
        self.nodes[0].z[0].order()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn z_at(&self, node: usize, tau: C64) -> Vec<C64> {
        self.nodes[node].z.iter().map(|d| d.eval(tau)).collect()
    }

    pub fn xi_at(&self, node: usize, tau: C64) -> Vec<C64> {
        self.nodes[node].xi.iter().map(|d| d.eval(tau)).collect()
    }

    /// Boundary samples `z_i(w, theta_j)` as `[component][j]`.
    pub fn z_trace(&self, node: usize) -> Vec<CircleFunction> {
        self.nodes[node].z.iter().map(|d| d.trace(&self.grid)).collect()
    }

    pub fn xi_trace(&self, node: usize) -> Vec<CircleFunction> {
        self.nodes[node].xi.iter().map(|d| d.trace(&self.grid)).collect()
    }

    /// `max |z(w, -i) - w|`.
    pub fn fixed_point_error(&self) -> f64 {
        let m = C64::new(0.0, -1.0);
        (0..self.len())
            .map(|k| self.z_at(k, m).iter().zip(&self.spatial.nodes[k]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// Largest negative-frequency mass of any boundary trace, relative.
    pub fn holomorphy_defect(&self) -> f64 {
        self.nodes
            .iter()
            .flat_map(|n| n.z.iter().chain(&n.xi))
            .map(|d| d.negative_mode_mass(&self.grid))
            .fold(0.0, f64::max)
    }

    /// Largest Taylor-coefficient distance to another family on the same nodes.
    pub fn distance(&self, other: &Self) -> f64 {
        self.nodes.iter().zip(&other.nodes).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }

    /// Largest boundary-sample distance of the `z` and `xi` components.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.len() {
            let pairs = self.z_trace(k).into_iter().zip(other.z_trace(k)).chain(self.xi_trace(k).into_iter().zip(other.xi_trace(k)));
            for (a, b) in pairs {
                worst = worst.max(a.sub(&b).sup_norm());
            }
        }
        worst
    }

    /// CSV of Taylor coefficients: `node, component, k, re, im`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["node", "component", "k", "re", "im"])?;
        for (k, node) in self.nodes.iter().enumerate() {
            let named = node.z.iter().enumerate().map(|(i, d)| (format!("z{}", i + 1), d));
            let named = named.chain(node.xi.iter().enumerate().map(|(i, d)| (format!("xi{}", i + 1), d)));
            for (name, d) in named {
                for (m, a) in d.coeffs().iter().enumerate() {
                    out.write_record([k.to_string(), name.clone(), m.to_string(), format!("{:.17e}", a.re), format!("{:.17e}", a.im)])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    /// CSV of spatial nodes: `node, re(w1), im(w1), ..`.
    pub fn write_nodes_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["node".to_string()];
        for i in 1..=self.dim() {
            header.push(format!("re_w{i}"));
            header.push(format!("im_w{i}"));
        }
        out.write_record(&header)?;
        for (k, w) in self.spatial.nodes.iter().enumerate() {
            let mut row = vec![k.to_string()];
            for v in w {
                row.push(format!("{:.17e}", v.re));
                row.push(format!("{:.17e}", v.im));
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Constant discs at one node: `z = w`, `xi = d rho(w)`.
pub fn trivial_node(rho: &dyn Potential, w: &[C64], order: usize) -> NodeSolution {
    NodeSolution {
        z: w.iter().map(|&v| HolomorphicDisc::constant(v, order)).collect(),
        xi: rho.grad(w, 0.0).into_iter().map(|v| HolomorphicDisc::constant(v, order)).collect(),
        dropped_mass: 0.0,
    }
}

/// `z(w, tau) = w`, `xi(w, tau) = d rho(w)`.
pub fn trivial_foliation(rho: &dyn Potential, spatial: &SpatialGrid, grid: &CircleGrid) -> DiscFamily {
    let order = HolomorphicDisc::default_order(grid);
    DiscFamily {
        grid: grid.clone(),
        spatial: spatial.clone(),
        nodes: spatial.nodes.iter().map(|w| trivial_node(rho, w, order)).collect(),
    }
}
