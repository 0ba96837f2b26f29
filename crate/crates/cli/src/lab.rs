use std::f64::consts::PI;

use clap::ValueEnum;
use hcma_circle::{hilbert_transform, CircleFunction, CircleGrid, C64};
use hcma_linear::{
    solution_csv, solve_linear_perturbed, summary_json, BoundaryCoeffField, BoundaryData, HermitianField, Mat,
    SymmetricField,
};
use hcma_regularity::{
    bmo_uniformity_check, counterexample_family, czo_bmo_bound_check, holder_blowup_fit, jn_tail_fit, log_growth_fit,
    offaxis_holder_scan, RegularityReport,
};
use serde_json::json;

use crate::report::{solver, Failure, Out};

/// Fractions of `alpha` used as the Hölder indices of the blow-up fit.
const BETA_FRACTIONS: [f64; 4] = [0.9, 0.8, 0.6, 0.4];
const CZO_TRIALS: usize = 20;
const CZO_SIZE: usize = 1024;

pub fn counterexample(out: &Out, alpha: f64, levels: u32, size: usize, seed: u64) -> Result<(), Failure> {
    let fam = counterexample_family(alpha, size, levels).map_err(|e| Failure::Parse(e.to_string()))?;
    let betas: Vec<f64> = BETA_FRACTIONS.iter().map(|f| f * alpha).collect();
    let grid = fam.grid().clone();
    let step = hilbert_transform(&CircleFunction::from_real_fn(&grid, |t| if t < PI { 1.0 } else { -1.0 }));
    let lambdas: Vec<f64> = (0..=25).map(|k| 0.5 + 0.1 * k as f64).collect();
    let reports: Vec<RegularityReport> = vec![
        log_growth_fit(&fam).map_err(solver)?,
        offaxis_holder_scan(&fam).map_err(solver)?,
        bmo_uniformity_check(&fam).map_err(solver)?,
        holder_blowup_fit(&fam, &betas).map_err(solver)?,
        czo_bmo_bound_check(CZO_TRIALS, CZO_SIZE, seed).map_err(solver)?,
        jn_tail_fit(&step, &lambdas),
    ];
    for r in &reports {
        r.write_to(&out.dir).map_err(crate::report::io)?;
    }
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| !*c.1).map(move |c| format!("{}.{}", r.experiment, c.0)))
        .collect();
    out.json(
        "counterexample.json",
        &json!({
            "alpha": alpha,
            "levels": levels,
            "size": size,
            "betas": betas,
            "experiments": reports.iter().map(|r| (r.experiment.clone(), r.passed())).collect::<std::collections::BTreeMap<_, _>>(),
            "failed_checks": failed,
        }),
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(failed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    /// `A~ = 1 + delta cos(theta)`, `B~ = 0`.
    Cos,
    /// As `cos`, with `B~ = delta e^{-2 i theta}`.
    Mixed,
}

fn scalar(x: C64) -> Mat {
    Mat::from_element(1, 1, x)
}

pub fn linear(out: &Out, delta: f64, shape: Shape, size: usize, tol: f64, max_iter: usize) -> Result<(), Failure> {
    let grid = CircleGrid::new(size).map_err(|e| Failure::Parse(e.to_string()))?;
    let parse = |e: hcma_linear::LinearError| Failure::Parse(e.to_string());
    let a_t = BoundaryCoeffField::from_fn(&grid, 1, true, |_, t| scalar(C64::new(1.0 + delta * t.cos(), 0.0))).map_err(parse)?;
    let b_t = BoundaryCoeffField::from_fn(&grid, 1, false, |_, t| match shape {
        Shape::Cos => scalar(C64::new(0.0, 0.0)),
        Shape::Mixed => scalar(C64::from_polar(delta, -2.0 * t)),
    })
    .map_err(parse)?;
    let a = HermitianField::constant(scalar(C64::new(1.0, 0.0)), 1, 0.5).map_err(parse)?;
    let b = SymmetricField::zero(1, 1);
    let data = CircleFunction::from_fn(&grid, |t| C64::from_polar(1.0, -t));
    let data = BoundaryData::new(&grid, vec![vec![data]]).map_err(parse)?;
    match solve_linear_perturbed(&a_t, &b_t, &a, &b, &data, tol, max_iter) {
        Ok(sol) => {
            out.csv("linear_solution.csv", |f| solution_csv(&sol, 0, f))?;
            out.json("linear.json", &json!({ "delta": delta, "shape": format!("{shape:?}").to_lowercase(), "report": summary_json(&sol.report) }))
        }
        Err(e) => {
            out.json("linear.json", &json!({ "delta": delta, "shape": format!("{shape:?}").to_lowercase(), "error": e.to_string() }))?;
            Err(solver(e))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Probe {
    Cos,
    Sin,
    Step,
}

pub fn hilbert(out: &Out, probe: Probe, size: usize) -> Result<(), Failure> {
    let grid = CircleGrid::new(size).map_err(|e| Failure::Parse(e.to_string()))?;
    let f = CircleFunction::from_real_fn(&grid, |t| match probe {
        Probe::Cos => t.cos(),
        Probe::Sin => t.sin(),
        Probe::Step => {
            if t < PI {
                1.0
            } else {
                -1.0
            }
        }
    });
    let h = hilbert_transform(&f);
    out.csv("hilbert.csv", |file| {
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["theta", "input", "hilbert"])?;
        for j in 0..grid.size() {
            w.write_record([grid.theta(j), f.value(j).re, h.value(j).re].map(|v| format!("{v:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    })
}
