use std::f64::consts::PI;

use hcma_circle::{bmo_norm, bmo_of_values, hilbert_transform, jn_tail, CircleFunction, CircleGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{cutoff, linear_fit, ParamFamily, RegularityError, RegularityReport, Table};

/// Off-axis angles at which the parameter-direction Hölder constant is measured.
pub const OFFAXIS_ANGLES: [f64; 4] = [0.8, 0.4, 0.2, 0.1];

/// `f(x, theta) = -sign(theta) s(|theta|) min(|x|, |theta|)^alpha` with theta in `(-pi, pi]`,
/// sampled at `x = 0` and `x = 2^-j`, `j = 3..=levels`.
pub fn counterexample_family(alpha: f64, size: usize, levels: u32) -> Result<ParamFamily, RegularityError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(RegularityError::InvalidAlpha(alpha));
    }
    if levels < 4 {
        return Err(RegularityError::TooFewLevels(levels as usize));
    }
    let grid = CircleGrid::new(size)?;
    let xs: Vec<f64> = std::iter::once(0.0).chain((3..=levels).map(|j| 2f64.powi(-(j as i32)))).collect();
    Ok(ParamFamily::from_fn("counterexample", alpha, xs, &grid, move |x, theta| counterexample_value(alpha, x, theta)))
}

/// Pointwise value of the counterexample; `theta` is read mod 2 pi into `(-pi, pi]`.
pub fn counterexample_value(alpha: f64, x: f64, theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    let t = if t > PI { t - 2.0 * PI } else { t };
    if t == 0.0 {
        return 0.0;
    }
    -t.signum() * cutoff(t.abs()) * x.abs().min(t.abs()).powf(alpha)
}

fn check_geometric(fam: &ParamFamily) -> Result<(), RegularityError> {
    let xs = &fam.xs;
    if xs.len() < 3 {
        return Err(RegularityError::TooFewLevels(xs.len().saturating_sub(1)));
    }
    if xs[0] != 0.0 {
        return Err(RegularityError::GridNotGeometric(format!("first node is {} instead of 0", xs[0])));
    }
    if xs[1] <= 0.0 || xs[1].log2().fract() != 0.0 {
        return Err(RegularityError::GridNotGeometric(format!("first positive node {} is not a power of 2", xs[1])));
    }
    for w in xs[1..].windows(2) {
        if w[1] != 0.5 * w[0] {
            return Err(RegularityError::GridNotGeometric(format!("{} does not halve {}", w[1], w[0])));
        }
    }
    Ok(())
}

/// Growth of `|Hf(x, 0) - Hf(0, 0)|` against the model `c x^alpha log(1/x) + d`.
pub fn log_growth_fit(fam: &ParamFamily) -> Result<RegularityReport, RegularityError> {
    check_geometric(fam)?;
    let h = fam.hilbert_slices();
    let a = fam.alpha;
    let mut table = Table::new(&["x", "difference", "model", "quotient"]);
    for (i, &x) in fam.xs.iter().enumerate().skip(1) {
        let d = (h[i].value(0).re - h[0].value(0).re).abs();
        table.push(vec![x, d, x.powf(a) * -x.ln(), d / x.powf(a)]);
    }
    let x = table.column("x");
    let fit = linear_fit(&table.column("model"), &table.column("difference"));
    let minus_log: Vec<f64> = x.iter().map(|x| -x.ln()).collect();
    let quotient = linear_fit(&minus_log, &table.column("quotient"));
    let mut r = RegularityReport::new("log_growth", &fam.name);
    r.checks.insert("positive_slope".into(), fit.slope > 0.0);
    r.checks.insert("r2_at_least_0.98".into(), fit.r2 >= 0.98);
    r.values.insert("grid_size".into(), fam.grid().size() as f64);
    r.fits.insert("model".into(), fit);
    r.fits.insert("quotient_vs_log".into(), quotient);
    r.tables.insert("samples".into(), table);
    Ok(r)
}

/// Parameter-direction Hölder constants at fixed angles away from the singular point.
pub fn offaxis_holder_scan(fam: &ParamFamily) -> Result<RegularityReport, RegularityError> {
    check_geometric(fam)?;
    let h = fam.hilbert_slices();
    let g = fam.grid();
    let constant = |theta: f64| {
        let j = g.nearest_index(theta);
        fam.xs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &x)| (h[i].value(j).re - h[0].value(j).re).abs() / x.powf(fam.alpha))
            .fold(0.0, f64::max)
    };
    let mut table = Table::new(&["theta0", "log_weight", "constant"]);
    for &t in &OFFAXIS_ANGLES {
        table.push(vec![t, 1.0 - (t / 2.0).ln(), constant(t)]);
    }
    let consts = table.column("constant");
    let fit = linear_fit(&table.column("log_weight"), &consts);
    let mut r = RegularityReport::new("offaxis_holder", &fam.name);
    r.checks.insert("finite".into(), consts.iter().all(|c| c.is_finite()));
    r.checks.insert("grows_toward_axis".into(), consts.windows(2).all(|w| w[1] >= w[0]));
    r.checks.insert("r2_at_least_0.9".into(), fit.r2 >= 0.9);
    r.values.insert("constant_at_half_pi".into(), constant(PI / 2.0));
    r.fits.insert("constant_vs_log_weight".into(), fit);
    r.tables.insert("constants".into(), table);
    Ok(r)
}

/// BMO norms and sup norms of the Hölder quotients `(Hf(x) - Hf(0)) / x^alpha`.
pub fn bmo_uniformity_check(fam: &ParamFamily) -> Result<RegularityReport, RegularityError> {
    check_geometric(fam)?;
    let h = fam.hilbert_slices();
    let a = fam.alpha;
    let rows: Vec<Vec<f64>> = fam
        .xs
        .par_iter()
        .enumerate()
        .skip(1)
        .map(|(i, &x)| {
            let q: Vec<f64> = h[i].samples().iter().zip(h[0].samples()).map(|(p, o)| (p.re - o.re) / x.powf(a)).collect();
            let sup = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            vec![x, bmo_of_values(&q), sup]
        })
        .collect();
    let mut table = Table::new(&["distance", "bmo", "sup"]);
    rows.into_iter().for_each(|r| table.push(r));
    let bmo = table.column("bmo");
    let sup = table.column("sup");
    let mut sorted = bmo.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let max = sorted.last().copied().unwrap_or(0.0);
    let ratio = if median > 0.0 { max / median } else if max == 0.0 { 1.0 } else { f64::INFINITY };
    let minus_log: Vec<f64> = table.column("distance").iter().map(|t| -t.ln()).collect();
    let power = linear_fit(
        &minus_log.iter().map(|l| l.ln()).collect::<Vec<_>>(),
        &sup.iter().map(|s| s.max(f64::MIN_POSITIVE).ln()).collect::<Vec<_>>(),
    );
    let slope = linear_fit(&minus_log, &sup);
    let mut r = RegularityReport::new("bmo_uniformity", &fam.name);
    r.values.insert("bmo_max_over_median".into(), ratio);
    r.values.insert("bmo_max".into(), max);
    r.values.insert("log_power".into(), power.slope);
    r.checks.insert("bmo_ratio_at_most_3".into(), ratio <= 3.0);
    r.checks.insert("log_power_at_least_1".into(), power.slope >= 1.0);
    r.fits.insert("log_sup_vs_log_log".into(), power);
    r.fits.insert("sup_vs_log".into(), slope);
    r.tables.insert("quotients".into(), table);
    Ok(r)
}

fn random_trig(rng: &mut ChaCha8Rng, grid: &CircleGrid) -> CircleFunction {
    let degree = rng.gen_range(1..=16);
    let coeffs: Vec<(f64, f64)> = (0..=degree).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    CircleFunction::from_real_fn(grid, |t| {
        coeffs.iter().enumerate().map(|(m, (a, b))| a * (m as f64 * t).cos() + b * (m as f64 * t).sin()).sum()
    })
}

fn random_step(rng: &mut ChaCha8Rng, grid: &CircleGrid) -> CircleFunction {
    let mut jumps: Vec<f64> = (0..rng.gen_range(2..=6)).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    jumps.sort_by(f64::total_cmp);
    let levels: Vec<f64> = (0..=jumps.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    CircleFunction::from_real_fn(grid, |t| levels[jumps.iter().filter(|&&j| j <= t).count()])
}

/// Empirical BMO operator bound of the Hilbert transform on random polynomials and steps.
pub fn czo_bmo_bound_check(trials: usize, size: usize, seed: u64) -> Result<RegularityReport, RegularityError> {
    if trials < 10 {
        return Err(RegularityError::TooFewTrials(trials));
    }
    let grid = CircleGrid::new(size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = vec![
        CircleFunction::from_real_fn(&grid, f64::cos),
        CircleFunction::from_real_fn(&grid, |t| if t < PI { 1.0 } else { -1.0 }),
    ];
    for k in 0..trials {
        probes.push(if k % 2 == 0 { random_trig(&mut rng, &grid) } else { random_step(&mut rng, &grid) });
    }
    let rows: Vec<Option<Vec<f64>>> = probes
        .par_iter()
        .enumerate()
        .map(|(k, f)| {
            let b = bmo_norm(f);
            if b < 1e-12 {
                return None;
            }
            let hb = bmo_norm(&hilbert_transform(f));
            Some(vec![k as f64, b, hb, hb / b])
        })
        .collect();
    let mut table = Table::new(&["probe", "bmo", "bmo_hilbert", "ratio"]);
    rows.into_iter().flatten().for_each(|r| table.push(r));
    let ratios = table.column("ratio");
    let worst = ratios.iter().fold(0.0f64, |m, &r| m.max(r));
    let mut r = RegularityReport::new("czo_bmo_bound", "random");
    r.values.insert("constant".into(), worst);
    r.values.insert("cos_ratio".into(), ratios[0]);
    r.values.insert("step_ratio".into(), ratios[1]);
    r.values.insert("skipped".into(), (probes.len() - ratios.len()) as f64);
    r.checks.insert("constant_at_most_10".into(), worst <= 10.0);
    r.tables.insert("ratios".into(), table);
    Ok(r)
}

/// Parameter-direction Hölder-`beta` seminorm of the Hilbert transform for each
/// `beta`, fitted as `norm ~ (alpha - beta)^-p`.
pub fn holder_blowup_fit(fam: &ParamFamily, betas: &[f64]) -> Result<RegularityReport, RegularityError> {
    if betas.len() < 4 || betas.iter().any(|&b| !(b > 0.0 && b < fam.alpha)) {
        return Err(RegularityError::BadBetas(betas.to_vec()));
    }
    let h = fam.hilbert_slices();
    let vals: Vec<Vec<f64>> = h.iter().map(|s| s.real_values()).collect();
    let m = fam.xs.len();
    let rows: Vec<Vec<f64>> = betas
        .par_iter()
        .map(|&beta| {
            let mut best = 0.0f64;
            for i in 0..m {
                for j in i + 1..m {
                    let d = (fam.xs[i] - fam.xs[j]).abs().powf(beta);
                    let top = vals[i].iter().zip(&vals[j]).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
                    best = best.max(top / d);
                }
            }
            vec![beta, fam.alpha - beta, best]
        })
        .collect();
    let mut table = Table::new(&["beta", "gap", "seminorm"]);
    rows.into_iter().for_each(|r| table.push(r));
    let fit = linear_fit(
        &table.column("gap").iter().map(|g| -g.ln()).collect::<Vec<_>>(),
        &table.column("seminorm").iter().map(|s| s.max(f64::MIN_POSITIVE).ln()).collect::<Vec<_>>(),
    );
    let mut r = RegularityReport::new("holder_blowup", &fam.name);
    r.values.insert("exponent".into(), fit.slope);
    r.checks.insert("exponent_in_0.7_1.4".into(), (0.7..=1.4).contains(&fit.slope));
    r.fits.insert("log_seminorm_vs_log_inverse_gap".into(), fit);
    r.tables.insert("seminorms".into(), table);
    Ok(r)
}

/// Tail measure `|{|f - mean| > lambda}|` against `c1 exp(-c2 lambda / |f|_BMO)`.
pub fn jn_tail_fit(f: &CircleFunction, lambdas: &[f64]) -> RegularityReport {
    let bmo = bmo_norm(f);
    let mut table = Table::new(&["lambda", "tail"]);
    for &l in lambdas {
        table.push(vec![l, jn_tail(f, l)]);
    }
    let pts: Vec<(f64, f64)> = table.rows.iter().filter(|r| r[1] > 0.0).map(|r| (r[0], r[1].ln())).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let fit = linear_fit(&x, &y);
    let mut r = RegularityReport::new("john_nirenberg", "probe");
    r.values.insert("bmo".into(), bmo);
    r.values.insert("c1".into(), fit.intercept.exp());
    r.values.insert("c2".into(), -fit.slope * bmo);
    r.checks.insert("decays".into(), fit.slope < 0.0);
    r.checks.insert("r2_at_least_0.95".into(), fit.r2 >= 0.95);
    r.fits.insert("log_tail_vs_lambda".into(), fit);
    r.tables.insert("tails".into(), table);
    r
}
