use std::io::Write;

use serde_json::json;

use crate::{LinearSolution, SolveReport};

/// Taylor coefficients of one node as `component,k,re,im` rows (`z1`, ..., `xi1`, ...).
pub fn solution_csv<W: Write>(sol: &LinearSolution, node: usize, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["component", "k", "re", "im"])?;
    let s = &sol.nodes[node];
    let named = s
        .z
        .iter()
        .enumerate()
        .map(|(i, d)| (format!("z{}", i + 1), d))
        .chain(s.xi.iter().enumerate().map(|(i, d)| (format!("xi{}", i + 1), d)));
    for (name, d) in named {
        for (k, a) in d.coeffs().iter().enumerate() {
            out.write_record([name.clone(), k.to_string(), format!("{:.17e}", a.re), format!("{:.17e}", a.im)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// The `{sup_residual, iterations, contraction_ratio}` record.
pub fn summary_json(report: &SolveReport) -> serde_json::Value {
    json!({
        "sup_residual": report.sup_residual,
        "iterations": report.iterations,
        "contraction_ratio": report.contraction_ratio,
    })
}
