use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::RegularityError;

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub samples: usize,
    /// Residual sum of squares.
    pub residual: f64,
}

/// Ordinary least squares. `r2` is 1 for data with no variance that the line reproduces.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Fit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let total: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if total > 0.0 { 1.0 - residual / total } else if residual == 0.0 { 1.0 } else { 0.0 };
    Fit { slope, intercept, r2, samples: xs.len(), residual }
}

/// Raw numbers behind a fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let i = self.columns.iter().position(|c| c == name).expect("known column");
        self.rows.iter().map(|r| r[i]).collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for r in &self.rows {
            out.write_record(r.iter().map(|v| format!("{v:.17e}")))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub experiment: String,
    pub family: String,
    pub fits: BTreeMap<String, Fit>,
    pub values: BTreeMap<String, f64>,
    pub checks: BTreeMap<String, bool>,
    #[serde(skip)]
    pub tables: BTreeMap<String, Table>,
}

impl RegularityReport {
    pub fn new(experiment: &str, family: &str) -> Self {
        Self {
            experiment: experiment.into(),
            family: family.into(),
            fits: BTreeMap::new(),
            values: BTreeMap::new(),
            checks: BTreeMap::new(),
            tables: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.values().all(|&c| c)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data serializes")
    }

    /// Writes `<experiment>.json` and one `<experiment>_<table>.csv` per table.
    pub fn write_to(&self, dir: &Path) -> Result<(), RegularityError> {
        let io = |e: std::io::Error| RegularityError::Io(e.to_string());
        std::fs::create_dir_all(dir).map_err(io)?;
        let json = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
        std::fs::write(dir.join(format!("{}.json", self.experiment)), json).map_err(io)?;
        for (name, t) in &self.tables {
            let f = std::fs::File::create(dir.join(format!("{}_{name}.csv", self.experiment))).map_err(io)?;
            t.write_csv(f).map_err(|e| RegularityError::Io(e.to_string()))?;
        }
        Ok(())
    }
}
