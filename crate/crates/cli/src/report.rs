use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

/// Why a command stopped; maps onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Parse(String),
    Solver(String),
    Checks(Vec<String>),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Checks(_) => 4,
            Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Parse(m) => write!(f, "parse error: {m}"),
            Failure::Solver(m) => write!(f, "solver failure: {m}"),
            Failure::Checks(names) => write!(f, "checks failed: {}", names.join(", ")),
            Failure::Io(m) => write!(f, "io: {m}"),
        }
    }
}

pub fn solver<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Solver(e.to_string())
}

pub fn io<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Io(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    /// Failing warnings only fail the run under `--strict`.
    pub warning: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, passed: value <= limit, warning: false }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, passed: value >= limit, warning: false }
    }

    /// Pass/fail with the measured quantity in `value`.
    pub fn holds(name: &str, passed: bool, value: f64) -> Self {
        Self { name: name.into(), value, limit: f64::NAN, passed, warning: false }
    }

    pub fn warning(mut self) -> Self {
        self.warning = true;
        self
    }
}

/// Names of the checks that fail the run.
pub fn failing(checks: &[Check], strict: bool) -> Vec<String> {
    checks.iter().filter(|c| !c.passed && (strict || !c.warning)).map(|c| c.name.clone()).collect()
}

/// Output directory for reports and tables.
pub struct Out {
    pub dir: PathBuf,
}

impl Out {
    pub fn new(dir: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir).map_err(io)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn json(&self, name: &str, value: &Value) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).map_err(io)?;
        std::fs::write(self.path(name), text + "\n").map_err(io)
    }

    pub fn csv(&self, name: &str, write: impl FnOnce(File) -> csv::Result<()>) -> Result<(), Failure> {
        write(File::create(self.path(name)).map_err(io)?).map_err(io)
    }
}
