use std::f64::consts::PI;
use std::io::Write;

use hcma_circle::{CircleFunction, C64};
use hcma_discs::{fd_derivatives, foliation_samples, Potential};
use hcma_linear::NodeSolution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::product::write_point_values;
use crate::{harmonic_at, Context, FieldError, LeafField, ProductField, ProductGrid};

/// Smallest admissible eigenvalue of the real Hessian of `rho`.
pub const CONVEXITY_FLOOR: f64 = 0.5;

/// `L(z, tau) = 2 Re sum_p xi_p(x0, tau) (z_p - z_p(x0, tau)) + u(x0, tau)`.
#[derive(Debug, Clone)]
pub struct LeafLinear {
    pub node: usize,
    pub sol: NodeSolution,
    pub boundary: CircleFunction,
}

pub fn leaf_linear_function(leaf: &LeafField, node: usize) -> LeafLinear {
    LeafLinear { node, sol: leaf.family.nodes[node].clone(), boundary: leaf.boundary[node].clone() }
}

impl LeafLinear {
    pub fn eval(&self, z: &[C64], tau: C64) -> Result<f64, FieldError> {
        let lin: C64 = self.sol.xi.iter().zip(&self.sol.z).zip(z).map(|((x, d), v)| x.eval(tau) * (v - d.eval(tau))).sum();
        Ok(2.0 * lin.re + harmonic_at(&self.boundary, tau)?)
    }

    /// Largest entry of `d dbar L` in `(z, tau)` by centered differences with step `h`.
    pub fn pluriharmonic_defect(&self, z: &[C64], tau: C64, h: f64) -> f64 {
        let mut p = z.to_vec();
        p.push(tau);
        let n = z.len();
        let f = |q: &[C64]| self.eval(&q[..n], q[n]).unwrap_or(f64::NAN);
        fd_derivatives(f, &p, h).1.camax()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub lambda0: f64,
    pub probes: usize,
    /// Largest `L_x - Psi + (lambda0 / 6) |z - z(x, theta)|^2` over boundary probes; the bound asks for `<= 0`.
    pub max_margin: f64,
}

/// Envelope `F = max(max_x L_x - rho, -M)` over the leaves of a family.
#[derive(Debug, Clone)]
pub struct SubsolutionField {
    pub leaves: Vec<LeafLinear>,
    pub floor: f64,
    pub grid: ProductGrid,
    pub values: Vec<f64>,
    /// Leaf attaining the maximum at each grid point, `None` where the floor wins.
    pub attaining: Vec<Option<usize>>,
    /// `sup |F - Phi|` over leaf points.
    pub leaf_agreement: f64,
    /// `sup (F - Phi)` over the product grid.
    pub dominance: f64,
    pub envelope: EnvelopeReport,
    /// Leaf whose contribution to the envelope is subtracted instead of added.
    pub flipped: Option<usize>,
}

fn min_convexity(rho: &dyn Potential, ctx: &Context, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..64)
        .map(|_| {
            let z = ctx.chart.sample(&mut rng);
            rho.real_hessian(&z, 0.0).symmetric_eigen().eigenvalues.min()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn build_subsolution(
    leaf: &LeafField,
    product: &ProductField,
    ctx: Context,
    floor: Option<f64>,
    seed: u64,
) -> Result<SubsolutionField, FieldError> {
    let lambda = min_convexity(ctx.rho, &ctx, seed);
    if lambda < CONVEXITY_FLOOR {
        return Err(FieldError::NotConvex { min_eigenvalue: lambda, floor: CONVEXITY_FLOOR });
    }
    let fam = &leaf.family;
    let floor = match floor {
        Some(m) => m,
        None => {
            let mut sup = 0.0f64;
            for k in 0..fam.len() {
                let zt = fam.z_trace(k);
                for j in 0..fam.grid.size() {
                    let z: Vec<C64> = zt.iter().map(|c| c.value(j)).collect();
                    sup = sup.max((leaf.boundary[k].value(j).re - ctx.rho.value(&z, 0.0)).abs());
                }
            }
            2.0 * sup
        }
    };
    let mut field = SubsolutionField {
        leaves: (0..fam.len()).map(|k| leaf_linear_function(leaf, k)).collect(),
        floor,
        grid: product.grid.clone(),
        values: Vec::new(),
        attaining: Vec::new(),
        leaf_agreement: 0.0,
        dominance: f64::NEG_INFINITY,
        envelope: EnvelopeReport { lambda0: CONVEXITY_FLOOR, probes: 0, max_margin: f64::NEG_INFINITY },
        flipped: None,
    };
    for i in 0..product.grid.len() {
        let (z, tau) = product.grid.point(i);
        let (v, who) = field.eval(z, tau, ctx.rho)?;
        field.values.push(v);
        field.attaining.push(who);
        field.dominance = field.dominance.max(v - product.phi[i]);
    }
    for k in 0..fam.len() {
        for tau in foliation_samples() {
            let (v, _) = field.eval(&fam.z_at(k, tau), tau, ctx.rho)?;
            field.leaf_agreement = field.leaf_agreement.max((v - leaf.phi_at(k, tau, ctx.rho)?).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
    for _ in 0..64 {
        let z = ctx.chart.sample(&mut rng);
        for a in 0..16 {
            let theta = 2.0 * PI * a as f64 / 16.0;
            let tau = C64::from_polar(1.0, theta);
            let psi = ctx.pot.value(&z, theta);
            for (k, l) in field.leaves.iter().enumerate() {
                let d2: f64 = fam.z_at(k, tau).iter().zip(&z).map(|(a, b)| (a - b).norm_sqr()).sum();
                let margin = l.eval(&z, tau)? - psi + CONVEXITY_FLOOR / 6.0 * d2;
                field.envelope.max_margin = field.envelope.max_margin.max(margin);
                field.envelope.probes += 1;
            }
        }
    }
    Ok(field)
}

impl SubsolutionField {
    /// `(rho + F)(z, tau)` and the attaining leaf; ties go to the lowest index.
    fn top(&self, z: &[C64], tau: C64, rho: &dyn Potential) -> Result<(f64, Option<usize>), FieldError> {
        let mut best: Option<(f64, usize)> = None;
        let mut flipped = None;
        for (k, l) in self.leaves.iter().enumerate() {
            let v = l.eval(z, tau)?;
            if Some(k) == self.flipped {
                flipped = Some(v);
                continue;
            }
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, k));
            }
        }
        let (mut e, mut who) = match best {
            Some((v, k)) => (v, Some(k)),
            None => (f64::NEG_INFINITY, None),
        };
        if let (Some(v), Some(k)) = (flipped, self.flipped) {
            if v > e {
                e -= v - e;
                who = Some(k);
            }
        }
        let r = rho.value(z, 0.0);
        if r - self.floor > e {
            return Ok((r - self.floor, None));
        }
        Ok((e, who))
    }

    /// `F(z, tau)` and the attaining leaf (`None` where the floor wins).
    pub fn eval(&self, z: &[C64], tau: C64, rho: &dyn Potential) -> Result<(f64, Option<usize>), FieldError> {
        let (v, who) = self.top(z, tau, rho)?;
        Ok((v - rho.value(z, 0.0), who))
    }

    /// Copy in which leaf `k` enters the envelope with the opposite sign:
    /// where it would win, `E + (L_k - E)` becomes `E - (L_k - E)`.
    pub fn with_flipped_leaf(&self, k: usize) -> Self {
        Self { flipped: Some(k), ..self.clone() }
    }

    /// Columns `re(z1), im(z1), .., re(tau), im(tau), value`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        write_point_values(&self.grid, &self.values, w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PshViolation {
    pub sample: usize,
    pub radius: f64,
    /// `(rho + F)(center) - mean over the circle`.
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PshReport {
    pub samples: usize,
    pub circles: usize,
    pub radii: Vec<f64>,
    pub violations: Vec<PshViolation>,
    pub worst_deficit: f64,
}

const CIRCLE_POINTS: usize = 32;

/// Sub-mean-value test of `rho + F` on random complex circles of radius
/// `h`, `2h`, `4h`. Centres sit between the images of two random leaves at
/// a random `|tau| <= 1/2`, where the seams of the envelope are.
pub fn psh_check(
    field: &SubsolutionField,
    leaf: &LeafField,
    rho: &dyn Potential,
    samples: usize,
    h: f64,
    seed: u64,
) -> Result<PshReport, FieldError> {
    if !(h > 0.0 && 4.0 * h <= 0.5) {
        return Err(hcma_discs::DiscError::InvalidConfig(format!("psh radius h = {h} must lie in (0, 0.125]")).into());
    }
    let fam = &leaf.family;
    let n = fam.dim();
    let radii = vec![h, 2.0 * h, 4.0 * h];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for s in 0..samples {
        let tau = C64::from_polar(0.5 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
        let (x, y) = (rng.gen_range(0..fam.len()), rng.gen_range(0..fam.len()));
        let t: f64 = rng.gen();
        let (zx, zy) = (fam.z_at(x, tau), fam.z_at(y, tau));
        let mut center: Vec<C64> = zx.iter().zip(&zy).map(|(a, b)| a + t * (b - a)).collect();
        center.push(tau);
        let mut dir: Vec<C64> = (0..=n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = dir.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
        dir.iter_mut().for_each(|v| *v /= norm);
        let g = |p: &[C64]| field.top(&p[..n], p[n], rho).map(|r| r.0);
        let c = g(&center)?;
        for &r in &radii {
            let mut mean = 0.0;
            for j in 0..CIRCLE_POINTS {
                let e = C64::from_polar(r, 2.0 * PI * j as f64 / CIRCLE_POINTS as f64);
                let p: Vec<C64> = center.iter().zip(&dir).map(|(a, d)| a + e * d).collect();
                mean += g(&p)?;
            }
            mean /= CIRCLE_POINTS as f64;
            let deficit = c - mean;
            worst = worst.max(deficit);
            if deficit > 1e-8 * (1.0 + c.abs()) {
                violations.push(PshViolation { sample: s, radius: r, deficit });
            }
        }
    }
    Ok(PshReport { samples, circles: samples * radii.len(), radii, violations, worst_deficit: worst })
}
