use std::io::{Read, Write};

use crate::{CircleError, CircleGrid, C64};

/// Samples of a function on a [`CircleGrid`] together with its Fourier
/// coefficients (FFT order, see [`CircleGrid::mode_of_index`]).
#[derive(Debug, Clone)]
pub struct CircleFunction {
    grid: CircleGrid,
    samples: Vec<C64>,
    coeffs: Vec<C64>,
    real: bool,
}

impl CircleFunction {
    pub fn from_samples(grid: &CircleGrid, samples: Vec<C64>) -> Result<Self, CircleError> {
        if samples.len() != grid.size() {
            return Err(CircleError::LengthMismatch { expected: grid.size(), got: samples.len() });
        }
        let coeffs = grid.analyze(&samples);
        Ok(Self { grid: grid.clone(), samples, coeffs, real: false })
    }

    pub fn from_real(grid: &CircleGrid, values: &[f64]) -> Result<Self, CircleError> {
        let samples = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        let mut f = Self::from_samples(grid, samples)?;
        f.real = true;
        Ok(f)
    }

    pub fn from_fn(grid: &CircleGrid, f: impl Fn(f64) -> C64) -> Self {
        let samples = grid.nodes().into_iter().map(f).collect();
        Self::from_samples(grid, samples).expect("length matches grid")
    }

    pub fn from_real_fn(grid: &CircleGrid, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = grid.nodes().into_iter().map(f).collect();
        Self::from_real(grid, &values).expect("length matches grid")
    }

    /// Builds the function from coefficients in FFT order.
    pub fn from_coeffs(grid: &CircleGrid, coeffs: Vec<C64>) -> Result<Self, CircleError> {
        if coeffs.len() != grid.size() {
            return Err(CircleError::LengthMismatch { expected: grid.size(), got: coeffs.len() });
        }
        let samples = grid.synthesize(&coeffs);
        Ok(Self { grid: grid.clone(), samples, coeffs, real: false })
    }

    pub fn zero(grid: &CircleGrid) -> Self {
        let z = vec![C64::new(0.0, 0.0); grid.size()];
        Self { grid: grid.clone(), samples: z.clone(), coeffs: z, real: true }
    }

    pub fn grid(&self) -> &CircleGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of `e^{i m theta}`, zero outside the resolved band.
    pub fn coeff(&self, m: i64) -> C64 {
        let n = self.grid.size() as i64;
        if m < -n / 2 || m >= n / 2 {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[self.grid.index_of_mode(m)]
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn value(&self, j: usize) -> C64 {
        self.samples[j]
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.re).collect()
    }

    pub fn imag_values(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.im).collect()
    }

    pub fn real_part(&self) -> Self {
        Self::from_real(&self.grid, &self.real_values()).expect("same grid")
    }

    pub fn imag_part(&self) -> Self {
        Self::from_real(&self.grid, &self.imag_values()).expect("same grid")
    }

    pub fn max_imag(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    pub fn mean(&self) -> C64 {
        self.coeffs[0]
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Root-mean-square over the grid, i.e. the normalized L2 norm.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|c| c.norm_sqr()).sum();
        (s / self.samples.len() as f64).sqrt()
    }

    /// Relative sup error of synthesizing the cached coefficients back to samples.
    pub fn roundtrip_error(&self) -> f64 {
        let back = self.grid.synthesize(&self.coeffs);
        let err = back.iter().zip(&self.samples).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        err / self.sup_norm().max(f64::MIN_POSITIVE)
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Self {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(j, &v)| f(self.grid.theta(j), v))
            .collect();
        Self::from_samples(&self.grid, samples).expect("same grid")
    }

    pub fn conj(&self) -> Self {
        let mut f = self.map(|_, v| v.conj());
        f.real = self.real;
        f
    }

    pub fn scale(&self, s: C64) -> Self {
        let coeffs: Vec<C64> = self.coeffs.iter().map(|c| c * s).collect();
        let samples = self.samples.iter().map(|c| c * s).collect();
        Self { grid: self.grid.clone(), samples, coeffs, real: self.real && s.im == 0.0 }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.grid, other.grid, "functions live on different grids");
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| op(a, b)).collect();
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| op(a, b)).collect();
        Self { grid: self.grid.clone(), samples, coeffs, real: self.real && other.real }
    }

    /// Pointwise product on the grid (aliased, as any collocation product).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "functions live on different grids");
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).collect();
        let mut f = Self::from_samples(&self.grid, samples).expect("same grid");
        f.real = self.real && other.real;
        f
    }

    /// Writes `theta,re,im` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CircleError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["theta", "re", "im"])?;
        for (j, v) in self.samples.iter().enumerate() {
            out.write_record([
                format!("{:.17e}", self.grid.theta(j)),
                format!("{:.17e}", v.re),
                format!("{:.17e}", v.im),
            ])?;
        }
        out.flush().map_err(|e| CircleError::Csv(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, CircleError> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut samples = Vec::new();
        let mut real = true;
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64, CircleError> {
                rec.get(i)
                    .ok_or_else(|| CircleError::Csv("short row".into()))?
                    .trim()
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| CircleError::Csv(e.to_string()))
            };
            let v = C64::new(parse(1)?, parse(2)?);
            real &= v.im == 0.0;
            samples.push(v);
        }
        let grid = CircleGrid::new(samples.len())?;
        let mut f = Self::from_samples(&grid, samples)?;
        f.real = real;
        Ok(f)
    }
}
