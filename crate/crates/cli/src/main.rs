//! `hcma`: scenario-driven runs of the disc solver, the potential
//! reconstruction and the regularity experiments.

mod lab;
mod pipeline;
mod report;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::lab::{Probe, Shape};
use crate::pipeline::Run;
use crate::report::{Failure, Out};
use crate::scenario::Scenario;

#[derive(Debug, Parser)]
#[command(name = "hcma", version, about = "Holomorphic disc solver and Monge-Ampere diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Treat warnings as failures.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the disc family and write it with the residual history.
    Solve,
    /// Solve, then rebuild the potential and check the Monge-Ampere equation.
    Reconstruct,
    /// Solve and run the potential and residual diagnostics.
    Diagnose,
    /// Regularity experiments on the Hilbert-transform counterexample.
    Counterexample {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 14)]
        levels: u32,
        #[arg(long, default_value_t = 4096)]
        size: usize,
    },
    /// Linear problem with circle-dependent coefficients of size `delta`.
    Linear {
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Shape::Cos)]
        shape: Shape,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
        #[arg(long, default_value_t = 25)]
        max_iter: usize,
    },
    /// Hilbert transform of a probe function.
    Hilbert {
        #[arg(long, value_enum, default_value_t = Probe::Cos)]
        probe: Probe,
        #[arg(long, default_value_t = 256)]
        size: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Reconstruct => "reconstruct",
            Command::Diagnose => "diagnose",
            Command::Counterexample { .. } => "counterexample",
            Command::Linear { .. } => "linear",
            Command::Hilbert { .. } => "hilbert",
        }
    }
}

fn load(path: Option<&PathBuf>) -> Result<Scenario, Failure> {
    let path = path.ok_or_else(|| Failure::Parse("--scenario is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    Scenario::parse(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let out = Out::new(&cli.out)?;
    match &cli.command {
        Command::Solve | Command::Reconstruct | Command::Diagnose => {
            let scn = load(cli.scenario.as_ref())?;
            let seed = cli.seed.or(scn.seed).unwrap_or(0);
            let r = Run { scn: &scn, out: &out, seed, strict: cli.strict };
            match cli.command {
                Command::Solve => pipeline::solve(&r),
                Command::Reconstruct => pipeline::reconstruct(&r),
                _ => pipeline::diagnose(&r),
            }
        }
        Command::Counterexample { alpha, levels, size } => {
            lab::counterexample(&out, *alpha, *levels, *size, cli.seed.unwrap_or(0))
        }
        Command::Linear { delta, shape, size, tol, max_iter } => lab::linear(&out, *delta, *shape, *size, *tol, *max_iter),
        Command::Hilbert { probe, size } => lab::hilbert(&out, *probe, *size),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("hcma: {e}");
            return ExitCode::from(1);
        }
    }
    let start = Instant::now();
    let result = run(&cli);
    if let Ok(out) = Out::new(&cli.out) {
        let _ = pipeline::write_run_info(&out, cli.command.name(), start.elapsed().as_secs_f64(), rayon::current_num_threads());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hcma: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
