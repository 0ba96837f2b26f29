use hcma_circle::{solve_riemann_hilbert, CircleFunction, CircleGrid, HolomorphicDisc, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::{BoundaryCoeffField, BoundaryData, HermitianField, LinearError, Mat, SymmetricField};

/// Matrices whose condition number exceeds this are refused.
pub const MAX_CONDITION: f64 = 1e8;

/// Solution `(z, xi)` at one spatial node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSolution {
    pub z: Vec<HolomorphicDisc>,
    pub xi: Vec<HolomorphicDisc>,
    /// Fourier mass discarded when re-projecting boundary traces (relative).
    pub dropped_mass: f64,
}

impl NodeSolution {
    pub fn zero(dim: usize, order: usize) -> Self {
        Self { z: vec![HolomorphicDisc::zero(order); dim], xi: vec![HolomorphicDisc::zero(order); dim], dropped_mass: 0.0 }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            z: self.z.iter().zip(&other.z).map(|(a, b)| a.add(b)).collect(),
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a.add(b)).collect(),
            dropped_mass: self.dropped_mass.max(other.dropped_mass),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            z: self.z.iter().map(|d| d.scale(s)).collect(),
            xi: self.xi.iter().map(|d| d.scale(s)).collect(),
            dropped_mass: self.dropped_mass,
        }
    }

    /// Largest coefficient distance over all components.
    pub fn distance(&self, other: &Self) -> f64 {
        self.z
            .iter()
            .zip(&other.z)
            .chain(self.xi.iter().zip(&other.xi))
            .map(|(a, b)| a.max_coeff_distance(b))
            .fold(0.0, f64::max)
    }
}

/// Per-node iteration record of the perturbed solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeReport {
    pub iterations: usize,
    pub data_norms: Vec<f64>,
    pub contraction_ratio: f64,
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub sup_residual: f64,
    pub iterations: usize,
    /// Mean of `|b_{k+1}| / |b_k|` over the last (up to) three steps, worst node.
    pub contraction_ratio: f64,
    /// Per-step data norms, maximum over nodes.
    pub data_norms: Vec<f64>,
    pub max_condition: f64,
    pub dropped_mass: f64,
}

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub grid: CircleGrid,
    pub nodes: Vec<NodeSolution>,
    pub report: SolveReport,
}

/// `conj(A)^{-1}` after checking the determinant floor and the condition number.
fn conj_inverse(a: &Mat, sigma: f64, node: usize) -> Result<(Mat, f64), LinearError> {
    let det = a.determinant().re;
    if det < sigma {
        return Err(LinearError::DegenerateA { node, det, sigma });
    }
    let abar = a.map(|x| x.conj());
    let sv = abar.clone().singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &s| (l.min(s), h.max(s)));
    let cond = hi / lo;
    if !(cond <= MAX_CONDITION) {
        return Err(LinearError::IllConditioned { node, cond });
    }
    let inv = abar.lu().try_inverse().ok_or(LinearError::DegenerateA { node, det, sigma })?;
    Ok((inv, cond))
}

fn apply(m: &Mat, discs: &[HolomorphicDisc]) -> Vec<HolomorphicDisc> {
    (0..m.nrows())
        .map(|i| {
            discs.iter().enumerate().fold(HolomorphicDisc::zero(discs[0].order()), |acc, (j, d)| {
                acc.add(&d.scale(m[(i, j)]))
            })
        })
        .collect()
}

fn apply_fn(m: &Mat, fs: &[CircleFunction]) -> Vec<CircleFunction> {
    (0..m.nrows())
        .map(|i| {
            fs.iter().enumerate().fold(CircleFunction::zero(fs[0].grid()), |acc, (j, f)| acc.add(&f.scale(m[(i, j)])))
        })
        .collect()
}

/// `z = 1/2 conj(A)^{-1} (g2 - g1)`, `xi = 1/2 (g1 + g2) + B z` on Taylor coefficients.
fn recouple_discs(abar_inv: &Mat, b: &Mat, g1: &[HolomorphicDisc], g2: &[HolomorphicDisc]) -> (Vec<HolomorphicDisc>, Vec<HolomorphicDisc>) {
    let half = C64::new(0.5, 0.0);
    let diff: Vec<HolomorphicDisc> = g2.iter().zip(g1).map(|(p, q)| p.sub(q).scale(half)).collect();
    let z = apply(abar_inv, &diff);
    let bz = apply(b, &z);
    let xi = g1.iter().zip(g2).zip(&bz).map(|((p, q), r)| p.add(q).scale(half).add(r)).collect();
    (z, xi)
}

/// Constant-coefficient solve at one node; also returns the condition number of `conj(A)`.
pub fn solve_node_trivial(
    node: usize,
    a: &Mat,
    b: &Mat,
    sigma: f64,
    data: &[CircleFunction],
) -> Result<(NodeSolution, f64), LinearError> {
    let n = a.nrows();
    if data.len() != n || b.nrows() != n {
        return Err(LinearError::DimensionMismatch(format!("node {node}: A is {n}x{n}, data has {} components", data.len())));
    }
    let (inv, cond) = conj_inverse(a, sigma, node)?;
    let idx = data[0].grid().anchor_index();
    let mut g1 = Vec::with_capacity(n);
    let mut g2 = Vec::with_capacity(n);
    for f in data {
        let anchor = f.value(idx);
        g1.push(solve_riemann_hilbert(&f.real_part(), anchor)?);
        // g2 = i v with Re v = Im b and v(-i) = -i b(-i)
        let v = solve_riemann_hilbert(&f.imag_part(), C64::new(0.0, -1.0) * anchor)?;
        g2.push(v.scale(C64::new(0.0, 1.0)));
    }
    let (z, xi) = recouple_discs(&inv, b, &g1, &g2);
    Ok((NodeSolution { z, xi, dropped_mass: 0.0 }, cond))
}

fn traces(discs: &[HolomorphicDisc], grid: &CircleGrid) -> Vec<Vec<C64>> {
    discs.iter().map(|d| d.trace(grid).samples().to_vec()).collect()
}

/// `sup |xi - A(theta) conj z - B(theta) z - b|` at one node.
fn node_residual<'a>(
    sol: &NodeSolution,
    a_at: impl Fn(usize) -> &'a Mat,
    b_at: impl Fn(usize) -> &'a Mat,
    data: &[CircleFunction],
) -> f64 {
    let grid = data[0].grid();
    let (zt, xt) = (traces(&sol.z, grid), traces(&sol.xi, grid));
    let n = zt.len();
    let mut worst = 0.0f64;
    for t in 0..grid.size() {
        let (am, bm) = (a_at(t), b_at(t));
        for i in 0..n {
            let mut r = xt[i][t] - data[i].value(t);
            for j in 0..n {
                r -= am[(i, j)] * zt[j][t].conj() + bm[(i, j)] * zt[j][t];
            }
            worst = worst.max(r.norm());
        }
    }
    worst
}

/// Defect data `(A~ - A) conj z + (B~ - B) z` of a constant-coefficient solution.
fn defect(sol: &NodeSolution, da: &[Mat], db: &[Mat], grid: &CircleGrid) -> Vec<CircleFunction> {
    let zt = traces(&sol.z, grid);
    let n = zt.len();
    (0..n)
        .map(|i| {
            let samples = (0..grid.size())
                .map(|t| (0..n).map(|j| da[t][(i, j)] * zt[j][t].conj() + db[t][(i, j)] * zt[j][t]).sum())
                .collect();
            CircleFunction::from_samples(grid, samples).expect("grid length")
        })
        .collect()
}

fn sup(fs: &[CircleFunction]) -> f64 {
    fs.iter().map(|f| f.sup_norm()).fold(0.0, f64::max)
}

fn mean_recent_ratio(norms: &[f64]) -> f64 {
    let ratios: Vec<f64> = norms.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect();
    let tail = &ratios[ratios.len().saturating_sub(3)..];
    if tail.is_empty() {
        0.0
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    }
}

/// Perturbed solve at one node: repeated constant solves on the defect data.
#[allow(clippy::too_many_arguments)]
pub fn solve_node_perturbed(
    node: usize,
    a_t: &[Mat],
    b_t: &[Mat],
    a: &Mat,
    b: &Mat,
    sigma: f64,
    data: &[CircleFunction],
    tol: f64,
    max_iter: usize,
) -> Result<(NodeSolution, NodeReport), LinearError> {
    let grid = data[0].grid();
    let da: Vec<Mat> = a_t.iter().map(|m| m - a).collect();
    let db: Vec<Mat> = b_t.iter().map(|m| m - b).collect();
    let target = tol * (1.0 + sup(data));
    let (mut step, condition) = solve_node_trivial(node, a, b, sigma, data)?;
    let mut acc = step.clone();
    let mut norms = vec![sup(data)];
    let mut rising = 0;
    let mut iterations = 1;
    loop {
        let next = defect(&step, &da, &db, grid);
        let norm = sup(&next);
        let prev = *norms.last().expect("nonempty");
        norms.push(norm);
        if norm <= target {
            break;
        }
        rising = if norm >= prev { rising + 1 } else { 0 };
        if rising >= 3 {
            return Err(LinearError::NoContraction { node, norms });
        }
        if iterations >= max_iter {
            return Err(LinearError::MaxIterations { node, iterations });
        }
        step = solve_node_trivial(node, a, b, sigma, &next)?.0;
        acc = acc.add(&step);
        iterations += 1;
    }
    let contraction_ratio = mean_recent_ratio(&norms);
    Ok((acc, NodeReport { iterations, data_norms: norms, contraction_ratio, condition }))
}

fn check_lengths(what: &str, got: usize, nodes: usize) -> Result<(), LinearError> {
    if got != nodes {
        return Err(LinearError::DimensionMismatch(format!("{what} has {got} nodes, data has {nodes}")));
    }
    Ok(())
}

/// Exact solve for coefficients constant along the circle.
pub fn solve_linear_trivial(a: &HermitianField, b: &SymmetricField, data: &BoundaryData) -> Result<LinearSolution, LinearError> {
    check_lengths("A", a.len(), data.len())?;
    check_lengths("B", b.len(), data.len())?;
    let solved: Vec<(NodeSolution, f64, f64)> = (0..data.len())
        .into_par_iter()
        .map(|w| {
            let (sol, cond) = solve_node_trivial(w, a.get(w), b.get(w), a.sigma(), data.node(w))?;
            let res = node_residual(&sol, |_| a.get(w), |_| b.get(w), data.node(w));
            Ok((sol, cond, res))
        })
        .collect::<Result<_, LinearError>>()?;
    let report = SolveReport {
        sup_residual: solved.iter().map(|s| s.2).fold(0.0, f64::max),
        iterations: 1,
        contraction_ratio: 0.0,
        data_norms: vec![data.sup_norm()],
        max_condition: solved.iter().map(|s| s.1).fold(0.0, f64::max),
        dropped_mass: 0.0,
    };
    Ok(LinearSolution { grid: data.grid().clone(), nodes: solved.into_iter().map(|s| s.0).collect(), report })
}

/// Solve with circle-dependent coefficients `A~`, `B~` around the base `(A, B)`.
pub fn solve_linear_perturbed(
    a_t: &BoundaryCoeffField,
    b_t: &BoundaryCoeffField,
    a: &HermitianField,
    b: &SymmetricField,
    data: &BoundaryData,
    tol: f64,
    max_iter: usize,
) -> Result<LinearSolution, LinearError> {
    for (what, len) in [("A~", a_t.len()), ("B~", b_t.len()), ("A", a.len()), ("B", b.len())] {
        check_lengths(what, len, data.len())?;
    }
    if a_t.grid() != data.grid() || b_t.grid() != data.grid() {
        return Err(LinearError::DimensionMismatch("coefficient and data grids differ".into()));
    }
    let solved: Vec<(NodeSolution, NodeReport, f64)> = (0..data.len())
        .into_par_iter()
        .map(|w| {
            let (sol, rep) =
                solve_node_perturbed(w, a_t.node(w), b_t.node(w), a.get(w), b.get(w), a.sigma(), data.node(w), tol, max_iter)?;
            let res = node_residual(&sol, |t| &a_t.node(w)[t], |t| &b_t.node(w)[t], data.node(w));
            Ok((sol, rep, res))
        })
        .collect::<Result<_, LinearError>>()?;
    let steps = solved.iter().map(|s| s.1.data_norms.len()).max().unwrap_or(0);
    let data_norms = (0..steps)
        .map(|k| solved.iter().filter_map(|s| s.1.data_norms.get(k)).fold(0.0, |m: f64, &x| m.max(x)))
        .collect();
    let report = SolveReport {
        sup_residual: solved.iter().map(|s| s.2).fold(0.0, f64::max),
        iterations: solved.iter().map(|s| s.1.iterations).max().unwrap_or(0),
        contraction_ratio: solved.iter().map(|s| s.1.contraction_ratio).fold(0.0, f64::max),
        data_norms,
        max_condition: solved.iter().map(|s| s.1.condition).fold(0.0, f64::max),
        dropped_mass: 0.0,
    };
    Ok(LinearSolution { grid: data.grid().clone(), nodes: solved.into_iter().map(|s| s.0).collect(), report })
}

/// Boundary residual of `sol` against circle-dependent coefficients.
pub fn boundary_residual(sol: &LinearSolution, a_t: &BoundaryCoeffField, b_t: &BoundaryCoeffField, data: &BoundaryData) -> f64 {
    (0..data.len())
        .map(|w| node_residual(&sol.nodes[w], |t| &a_t.node(w)[t], |t| &b_t.node(w)[t], data.node(w)))
        .fold(0.0, f64::max)
}

type Traces = Vec<Vec<CircleFunction>>;

/// Boundary traces `g1 = xi - B z - conj(A) z` and `g2 = xi - B z + conj(A) z`.
pub fn decouple(a: &HermitianField, b: &SymmetricField, sol: &LinearSolution) -> Result<(Traces, Traces), LinearError> {
    check_lengths("A", a.len(), sol.nodes.len())?;
    check_lengths("B", b.len(), sol.nodes.len())?;
    let grid = &sol.grid;
    let mut g1 = Vec::with_capacity(sol.nodes.len());
    let mut g2 = Vec::with_capacity(sol.nodes.len());
    for (w, s) in sol.nodes.iter().enumerate() {
        let n = a.dim();
        if s.z.len() != n || s.xi.len() != n || b.get(w).nrows() != n {
            return Err(LinearError::DimensionMismatch(format!("node {w}: solution has {} components, A is {n}x{n}", s.z.len())));
        }
        let z: Vec<CircleFunction> = s.z.iter().map(|d| d.trace(grid)).collect();
        let xi: Vec<CircleFunction> = s.xi.iter().map(|d| d.trace(grid)).collect();
        let bz = apply_fn(b.get(w), &z);
        let az = apply_fn(&a.get(w).map(|x| x.conj()), &z);
        g1.push((0..n).map(|i| xi[i].sub(&bz[i]).sub(&az[i])).collect());
        g2.push((0..n).map(|i| xi[i].sub(&bz[i]).add(&az[i])).collect());
    }
    Ok((g1, g2))
}

/// Inverse of [`decouple`]; traces are re-projected onto nonnegative modes.
pub fn recouple(a: &HermitianField, b: &SymmetricField, g1: &[Vec<CircleFunction>], g2: &[Vec<CircleFunction>]) -> Result<LinearSolution, LinearError> {
    check_lengths("g1", g1.len(), a.len())?;
    check_lengths("g2", g2.len(), a.len())?;
    check_lengths("B", b.len(), a.len())?;
    let grid = g1.first().and_then(|v| v.first()).map(|f| f.grid().clone()).ok_or_else(|| LinearError::DimensionMismatch("empty traces".into()))?;
    let order = HolomorphicDisc::default_order(&grid);
    let mut nodes = Vec::with_capacity(a.len());
    let mut max_condition = 0.0f64;
    for w in 0..a.len() {
        if g1[w].len() != a.dim() || g2[w].len() != a.dim() {
            return Err(LinearError::DimensionMismatch(format!("node {w}: trace count differs from dim A")));
        }
        let (inv, cond) = conj_inverse(a.get(w), a.sigma(), w)?;
        max_condition = max_condition.max(cond);
        let mut dropped = 0.0f64;
        let mut project = |fs: &[CircleFunction]| -> Vec<HolomorphicDisc> {
            fs.iter()
                .map(|f| {
                    let (d, p) = HolomorphicDisc::from_trace(f, order);
                    dropped = dropped.max(p.dropped_mass);
                    d
                })
                .collect()
        };
        let (p1, p2) = (project(&g1[w]), project(&g2[w]));
        let (z, xi) = recouple_discs(&inv, b.get(w), &p1, &p2);
        nodes.push(NodeSolution { z, xi, dropped_mass: dropped });
    }
    let dropped_mass = nodes.iter().map(|s| s.dropped_mass).fold(0.0, f64::max);
    let report = SolveReport { sup_residual: 0.0, iterations: 0, contraction_ratio: 0.0, data_norms: vec![], max_condition, dropped_mass };
    Ok(LinearSolution { grid, nodes, report })
}
