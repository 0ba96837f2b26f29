use std::sync::Arc;

use hcma_circle::C64;
use hcma_discs::{
    consistency_check, gauge_shift_check, node_residual, smallness_check, solve_discs, DiscFamily, ExpressionPotential,
    GaugeShifted, SharedPotential, SolveSummary, Verdict,
};
use hcma_field::{
    build_subsolution, derivative_study, fit_order, ma_residual, psh_check, reconstruct_on_leaves, resample_to_product,
    Context, ProductGrid, CONVEXITY_FLOOR, INVERSION_TOLERANCE, MA_FLOOR, MA_ORDER,
};
use serde_json::{json, Value};

use crate::report::{failing, io, solver, Check, Failure, Out};
use crate::scenario::{Scenario, Setup};

/// Largest boundary trace error of the reconstructed potential.
const TRACE_TOLERANCE: f64 = 1e-10;
const BOUNDARY_TOLERANCE: f64 = 1e-8;
const BOUNDARY_ANGLES: usize = 16;
const LEAF_AGREEMENT: f64 = 1e-7;
const DOMINANCE: f64 = 1e-9;
const FIXED_POINT_TOLERANCE: f64 = 1e-10;
const GAUGE_PHI_TOLERANCE: f64 = 1e-7;
const CONSISTENCY_SAMPLES: usize = 64;

pub struct Run<'a> {
    pub scn: &'a Scenario,
    pub out: &'a Out,
    pub seed: u64,
    pub strict: bool,
}

struct Solved {
    setup: Setup,
    fam: DiscFamily,
    summary: SolveSummary,
    checks: Vec<Check>,
    report: serde_json::Map<String, Value>,
}

fn setup(scn: &Scenario) -> Result<Setup, Failure> {
    scn.setup().map_err(Failure::Parse)
}

fn gauge(scn: &Scenario) -> Result<Option<SharedPotential>, Failure> {
    match &scn.diagnostics.gauge {
        None => Ok(None),
        Some(src) => {
            let h = ExpressionPotential::parse(src, scn.potential.dim()).map_err(|e| Failure::Parse(e.to_string()))?;
            Ok(Some(Arc::new(h)))
        }
    }
}

fn finish(run: &Run, name: &str, checks: Vec<Check>, mut report: serde_json::Map<String, Value>) -> Result<(), Failure> {
    let bad = failing(&checks, run.strict);
    report.insert("checks".into(), json!(checks));
    report.insert("passed".into(), json!(bad.is_empty()));
    run.out.json(name, &Value::Object(report))?;
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(bad))
    }
}

fn solve_and_write(run: &Run) -> Result<Solved, Failure> {
    let scn = run.scn;
    let setup = setup(scn)?;
    let (pot, rho) = (setup.pot.as_ref(), setup.rho.as_ref());
    let (fam, summary) = solve_discs(pot, rho, &setup.spatial, &setup.circle, &setup.chart, &scn.solver).map_err(solver)?;
    run.out.csv("discs.csv", |f| fam.write_csv(f))?;
    run.out.csv("nodes.csv", |f| fam.write_nodes_csv(f))?;
    run.out.csv("residual_history.csv", |f| {
        let mut w = csv::Writer::from_writer(f);
        w.write_record(["step", "residual"])?;
        for (k, r) in summary.residual_history.iter().enumerate() {
            w.write_record([k.to_string(), format!("{r:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    })?;

    let final_residual = *summary.residual_history.last().expect("history starts with the initial residual");
    let mut checks = vec![
        Check::at_most("boundary_residual", final_residual, scn.solver.residual_tol),
        Check::at_most("fixed_point", summary.fixed_point_error, FIXED_POINT_TOLERANCE),
    ];
    let mut report = serde_json::Map::new();
    report.insert("scenario".into(), json!(scn.name));
    report.insert("seed".into(), json!(run.seed));
    report.insert("nodes".into(), json!(fam.len()));
    report.insert("solve".into(), json!(summary));
    let d = &scn.diagnostics;
    if d.smallness {
        let s = smallness_check(pot, rho, &setup.chart, d.smallness_alpha, d.smallness_threshold, run.seed);
        checks.push(Check::holds("smallness", s.verdict == Verdict::Pass, s.norm).warning());
        report.insert("smallness".into(), json!(s));
    }
    Ok(Solved { setup, fam, summary, checks, report })
}

pub fn solve(run: &Run) -> Result<(), Failure> {
    let s = solve_and_write(run)?;
    finish(run, "diagnostics.json", s.checks, s.report)
}

pub fn diagnose(run: &Run) -> Result<(), Failure> {
    let Solved { setup, fam, summary, mut checks, mut report } = solve_and_write(run)?;
    let pot = setup.pot.as_ref();
    let d = &run.scn.diagnostics;
    if d.consistency {
        let c = consistency_check(pot, &setup.chart, CONSISTENCY_SAMPLES, run.seed);
        checks.push(Check::at_most("consistency_gradient", c.grad_error, 1e-6));
        checks.push(Check::at_most("consistency_hessian", c.hessian_error, 1e-4));
        checks.push(Check::at_most("consistency_hermitian", c.hermitian_defect, 1e-12));
        report.insert("consistency".into(), json!(c));
    }
    let mut rows = Vec::with_capacity(fam.len());
    for k in 0..fam.len() {
        let r = node_residual(k, &fam.nodes[k], pot, &setup.chart, &fam.grid).map_err(solver)?;
        rows.push(r.iter().map(|f| f.sup_norm()).fold(0.0, f64::max));
    }
    run.out.csv("node_residuals.csv", |f| {
        let mut w = csv::Writer::from_writer(f);
        let mut head: Vec<String> = (1..=fam.dim()).flat_map(|p| [format!("re_w{p}"), format!("im_w{p}")]).collect();
        head.push("residual".into());
        w.write_record(&head)?;
        for (k, r) in rows.iter().enumerate() {
            let mut rec: Vec<String> = fam.spatial.nodes[k].iter().flat_map(|c| [c.re, c.im]).map(|v| format!("{v:.17e}")).collect();
            rec.push(format!("{r:.17e}"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    })?;
    report.insert("node_residuals".into(), json!(rows));
    report.insert("newton_steps".into(), json!(summary.iterations));
    if let Some(h) = gauge(run.scn)? {
        let shifted = GaugeShifted { base: setup.pot.clone(), gauge: h.clone() };
        let rho2 = GaugeShifted { base: setup.rho.clone(), gauge: h.clone() };
        let (fb, _) =
            solve_discs(&shifted, &rho2, &setup.spatial, &setup.circle, &setup.chart, &run.scn.solver).map_err(solver)?;
        let g = gauge_shift_check(&fam, &fb, h.as_ref(), &setup.chart, run.seed).map_err(solver)?;
        checks.push(Check::holds("gauge_shift", g.passed, g.z_difference.max(g.xi_difference)));
        report.insert("gauge".into(), json!(g));
    }
    finish(run, "diagnostics.json", checks, report)
}

pub fn reconstruct(run: &Run) -> Result<(), Failure> {
    let Solved { setup, fam, checks: solve_checks, report: solve_report, .. } = solve_and_write(run)?;
    let scn = run.scn;
    let d = &scn.diagnostics;
    let (pot, rho) = (setup.pot.as_ref(), setup.rho.as_ref());
    let ctx = Context { pot, rho, chart: &setup.chart, cfg: &scn.solver };
    let mut checks = solve_checks;
    let mut report = serde_json::Map::new();
    report.insert("scenario".into(), json!(scn.name));
    report.insert("seed".into(), json!(run.seed));
    report.insert("smallness".into(), solve_report.get("smallness").cloned().unwrap_or(Value::Null));

    let leaf = reconstruct_on_leaves(&fam, pot, rho, &setup.chart).map_err(solver)?;
    checks.push(Check::at_most("trace_error", leaf.trace_error(pot), TRACE_TOLERANCE));

    if d.derivative_identity {
        let (reports, fit) =
            derivative_study(pot, rho, &scn.center(), &d.derivative_spacings, &setup.circle, &setup.chart, &scn.solver)
                .map_err(solver)?;
        checks.push(Check::holds("derivative_identity_order", fit.passed, fit.order));
        report.insert("derivative_identity".into(), json!({ "reports": reports, "fit": fit }));
    }

    let (z_center, tau_center) = (scn.center(), scn.tau_center());
    let spacings = &scn.grid.product_spacings;
    let mut coarsest = None;
    if d.ma_residual {
        let mut reports = Vec::with_capacity(spacings.len());
        let mut finest = None;
        for &h in spacings {
            let pg = ProductGrid::tensor(z_center.clone(), tau_center, h, scn.grid.product_points).map_err(solver)?;
            let pf = resample_to_product(&leaf, &pg, ctx).map_err(solver)?;
            reports.push(ma_residual(&pf).map_err(solver)?);
            if coarsest.is_none() {
                coarsest = Some(pf.clone());
            }
            finest = Some(pf);
        }
        if let Some(pf) = &finest {
            run.out.csv("product.csv", |f| pf.write_csv(f))?;
        }
        let errors: Vec<f64> = reports.iter().map(|r| r.sup_det).collect();
        let fit = fit_order(spacings, &errors, MA_ORDER, MA_FLOOR);
        let min_eig = reports.iter().map(|r| r.min_z_eigenvalue).fold(f64::INFINITY, f64::min);
        let inversion = reports.iter().map(|r| r.max_inversion_residual).fold(0.0, f64::max);
        checks.push(Check::holds("ma_order", fit.passed, fit.order));
        checks.push(Check::at_least("ma_z_block_eigenvalue", min_eig, CONVEXITY_FLOOR));
        checks.push(Check::at_most("inversion_residual", inversion, INVERSION_TOLERANCE));
        let summary: Vec<Value> = reports
            .iter()
            .map(|r| {
                json!({
                    "spacing": r.spacing,
                    "sup_det": r.sup_det,
                    "sup_residual": r.sup_residual,
                    "min_z_eigenvalue": r.min_z_eigenvalue,
                    "max_inversion_residual": r.max_inversion_residual,
                    "points": r.points.len(),
                })
            })
            .collect();
        report.insert("ma_residual".into(), json!({ "levels": summary, "fit": fit }));
    }

    let bg = ProductGrid::boundary(vec![z_center.clone()], BOUNDARY_ANGLES).map_err(solver)?;
    let boundary = resample_to_product(&leaf, &bg, ctx).map_err(solver)?.boundary_agreement(pot);
    checks.push(Check::at_most("boundary_agreement", boundary, BOUNDARY_TOLERANCE));

    if d.subsolution {
        let pf = match coarsest {
            Some(pf) => pf,
            None => {
                let h = spacings.first().copied().unwrap_or(0.04);
                let pg = ProductGrid::tensor(z_center.clone(), tau_center, h, scn.grid.product_points).map_err(solver)?;
                resample_to_product(&leaf, &pg, ctx).map_err(solver)?
            }
        };
        let sub = build_subsolution(&leaf, &pf, ctx, d.floor, run.seed).map_err(solver)?;
        let psh = psh_check(&sub, &leaf, rho, d.psh_samples, d.psh_radius, run.seed).map_err(solver)?;
        run.out.csv("subsolution.csv", |f| sub.write_csv(f))?;
        checks.push(Check::at_most("leaf_agreement", sub.leaf_agreement, LEAF_AGREEMENT));
        checks.push(Check::at_most("dominance", sub.dominance, DOMINANCE));
        checks.push(Check::at_most("psh_violations", psh.violations.len() as f64, 0.0));
        report.insert(
            "subsolution".into(),
            json!({
                "floor": sub.floor,
                "leaf_agreement": sub.leaf_agreement,
                "dominance": sub.dominance,
                "envelope": sub.envelope,
                "floor_points": sub.attaining.iter().filter(|a| a.is_none()).count(),
                "psh": psh,
            }),
        );
    }

    if let Some(h) = gauge(scn)? {
        let shifted = GaugeShifted { base: setup.pot.clone(), gauge: h.clone() };
        let rho2 = GaugeShifted { base: setup.rho.clone(), gauge: h };
        let (fb, _) = solve_discs(&shifted, &rho2, &setup.spatial, &setup.circle, &setup.chart, &scn.solver).map_err(solver)?;
        let lb = reconstruct_on_leaves(&fb, &shifted, &rho2, &setup.chart).map_err(solver)?;
        let taus: Vec<C64> = hcma_discs::foliation_samples().into_iter().chain([C64::new(0.0, 0.0), tau_center]).collect();
        let dist = leaf.phi_distance(rho, &lb, &rho2, &taus).map_err(solver)?;
        checks.push(Check::at_most("gauge_phi", dist, GAUGE_PHI_TOLERANCE));
        report.insert("gauge_phi_distance".into(), json!(dist));
    }
    finish(run, "reconstruct.json", checks, report)
}

/// Wall-clock data kept apart from the reports so those stay byte-identical.
pub fn write_run_info(out: &Out, command: &str, elapsed: f64, threads: usize) -> Result<(), Failure> {
    let stamp = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_err(io)?.as_secs();
    out.json("run.json", &json!({ "command": command, "unix_time": stamp, "elapsed_seconds": elapsed, "threads": threads }))
}
