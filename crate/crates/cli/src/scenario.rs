use std::sync::Arc;

use hcma_circle::{CircleGrid, C64};
use hcma_discs::{
    ChartBox, Euclidean, ExpressionPotential, NashMoserConfig, Quartic, SharedPotential, SpatialGrid, Translation,
};
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Complex number written as `[re, im]`.
pub type Pair = [f64; 2];

fn c(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub seed: Option<u64>,
    pub potential: PotentialSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: NashMoserConfig,
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `Psi = rho = |z|^2`.
    Trivial { dim: usize },
    /// `|z - eps sigma(tau)|^2`; `sigma` lists Taylor coefficients per component,
    /// default `(tau + i) / 2`.
    Translation { dim: usize, eps: f64, sigma: Option<Vec<Vec<Pair>>> },
    Quartic { dim: usize, eps: f64, coefficients: Option<[f64; 3]> },
    /// Formula in `z`, `zb`, `z1`.., `tau`, `taub`, `theta`.
    Expression { dim: usize, source: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub circle_size: usize,
    /// Tensor grid centre, one `[re, im]` per component.
    pub center: Vec<Pair>,
    pub spacing: f64,
    pub points: usize,
    /// Half width of the chart cube.
    pub chart: f64,
    /// Centre of the product grids in `tau`.
    #[serde(default = "default_tau_center")]
    pub tau_center: Pair,
    #[serde(default = "default_product_spacings")]
    pub product_spacings: Vec<f64>,
    #[serde(default = "default_product_points")]
    pub product_points: usize,
}

fn default_tau_center() -> Pair {
    [0.2, 0.1]
}

fn default_product_spacings() -> Vec<f64> {
    vec![0.04, 0.02, 0.01]
}

fn default_product_points() -> usize {
    7
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Diagnostics {
    pub smallness: bool,
    pub smallness_alpha: f64,
    pub smallness_threshold: f64,
    pub consistency: bool,
    /// Pluriharmonic gauge `h`; checks that `rho + h` gives the same discs.
    pub gauge: Option<String>,
    pub derivative_identity: bool,
    pub derivative_spacings: Vec<f64>,
    pub ma_residual: bool,
    pub subsolution: bool,
    /// Floor `M` of the envelope; default twice the sup of `Psi - rho` on the leaves.
    pub floor: Option<f64>,
    pub psh_samples: usize,
    pub psh_radius: f64,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            smallness: true,
            smallness_alpha: 0.5,
            smallness_threshold: hcma_discs::SMALLNESS_THRESHOLD,
            consistency: true,
            gauge: None,
            derivative_identity: true,
            derivative_spacings: vec![0.1, 0.05, 0.025],
            ma_residual: true,
            subsolution: true,
            floor: None,
            psh_samples: 500,
            psh_radius: 0.01,
        }
    }
}

/// Everything a run needs, built from a scenario.
pub struct Setup {
    pub pot: SharedPotential,
    pub rho: SharedPotential,
    pub circle: CircleGrid,
    pub spatial: SpatialGrid,
    pub chart: ChartBox,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, String> {
        let s: Scenario = toml::from_str(text).map_err(|e| e.to_string())?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", s.schema_version));
        }
        s.solver.validate().map_err(|e| e.to_string())?;
        if s.grid.center.len() != s.potential.dim() {
            return Err(format!("grid centre has {} components, potential has n = {}", s.grid.center.len(), s.potential.dim()));
        }
        Ok(s)
    }

    pub fn setup(&self) -> Result<Setup, String> {
        let dim = self.potential.dim();
        let pot: SharedPotential = match &self.potential {
            PotentialSpec::Trivial { dim } => Arc::new(Euclidean { dim: *dim }),
            PotentialSpec::Translation { dim, eps, sigma } => match sigma {
                None => Arc::new(Translation::standard(*eps, *dim)),
                Some(s) if s.len() == *dim => {
                    Arc::new(Translation::new(*eps, s.iter().map(|row| row.iter().copied().map(c).collect()).collect()))
                }
                Some(s) => return Err(format!("sigma has {} components, expected {dim}", s.len())),
            },
            PotentialSpec::Quartic { dim, eps, coefficients } => {
                let mut q = Quartic::new(*dim, *eps);
                if let Some(co) = coefficients {
                    q.coefficients = *co;
                }
                Arc::new(q)
            }
            PotentialSpec::Expression { dim, source } => {
                Arc::new(ExpressionPotential::parse(source, *dim).map_err(|e| e.to_string())?)
            }
        };
        let circle = CircleGrid::new(self.grid.circle_size).map_err(|e| e.to_string())?;
        let center: Vec<C64> = self.grid.center.iter().copied().map(c).collect();
        let spatial = SpatialGrid::tensor(center, self.grid.spacing, self.grid.points).map_err(|e| e.to_string())?;
        if self.grid.chart.is_nan() || self.grid.chart <= 0.0 {
            return Err("chart half width must be positive".into());
        }
        Ok(Setup { pot, rho: Arc::new(Euclidean { dim }), circle, spatial, chart: ChartBox::cube(dim, self.grid.chart) })
    }

    pub fn tau_center(&self) -> C64 {
        c(self.grid.tau_center)
    }

    pub fn center(&self) -> Vec<C64> {
        self.grid.center.iter().copied().map(c).collect()
    }
}

impl PotentialSpec {
    pub fn dim(&self) -> usize {
        match self {
            PotentialSpec::Trivial { dim }
            | PotentialSpec::Translation { dim, .. }
            | PotentialSpec::Quartic { dim, .. }
            | PotentialSpec::Expression { dim, .. } => *dim,
        }
    }
}
