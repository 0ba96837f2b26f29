use std::f64::consts::PI;

use hcma_circle::{hilbert_transform, CircleFunction, CircleGrid, PairScan};
use hcma_regularity::*;

fn smooth(size: usize, levels: u32) -> ParamFamily {
    let xs = counterexample_family(0.5, 16, levels).unwrap().xs;
    ParamFamily::from_fn("smooth", 0.5, xs, &CircleGrid::new(size).unwrap(), |x, t| x.cos() * t.cos())
}

#[test]
fn counterexample_values() {
    for t in [0.1, 1.0, 2.5, 4.0, 6.0] {
        assert_eq!(counterexample_value(0.5, 0.0, t), 0.0);
    }
    assert!((counterexample_value(0.5, PI / 2.0, 0.5) + 0.5f64.sqrt()).abs() < 1e-15);
    assert!((counterexample_value(0.5, PI / 2.0, -0.5) - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(counterexample_value(0.5, 1.0, PI), 0.0);
    let fam = counterexample_family(0.5, 512, 8).unwrap();
    assert!(fam.slices[0].sup_norm() == 0.0);
    let norm = fam.holder_norm(&PairScan::default());
    assert!(norm <= 3.0, "{norm}");
    assert!(matches!(counterexample_family(1.0, 512, 8), Err(RegularityError::InvalidAlpha(_))));
}

#[test]
fn geometric_grid_is_required() {
    let g = CircleGrid::new(64).unwrap();
    let fam = ParamFamily::from_fn("bad", 0.5, vec![0.0, 0.25, 0.1], &g, |_, _| 0.0);
    assert!(matches!(log_growth_fit(&fam), Err(RegularityError::GridNotGeometric(_))));
}

#[test]
fn trivial_families_do_not_grow() {
    let xs = counterexample_family(0.5, 16, 10).unwrap().xs;
    let g = CircleGrid::new(1024).unwrap();
    let constant = ParamFamily::from_fn("constant", 0.5, xs.clone(), &g, |_, _| 1.0);
    let r = log_growth_fit(&constant).unwrap();
    assert_eq!(r.fits["model"].slope, 0.0);
    let r = log_growth_fit(&smooth(1024, 10)).unwrap();
    assert!(r.fits["model"].slope.abs() < 1e-12);

    let cos = ParamFamily::from_fn("harmonic", 0.5, xs, &g, |_, t| t.cos());
    let r = bmo_uniformity_check(&cos).unwrap();
    assert_eq!(r.values["bmo_max"], 0.0);
    assert!(r.tables["quotients"].column("sup").iter().all(|&s| s == 0.0));

    let r = offaxis_holder_scan(&smooth(1024, 10)).unwrap();
    let c = r.tables["constants"].column("constant");
    assert!(c.iter().all(|&v| v < 0.2), "{c:?}");
    let r = bmo_uniformity_check(&smooth(1024, 10)).unwrap();
    assert!(r.values["bmo_max"] < 0.2);
}

#[test]
fn offaxis_constants_grow_toward_the_axis() {
    let fam = counterexample_family(0.5, 4096, 12).unwrap();
    let r = offaxis_holder_scan(&fam).unwrap();
    assert!(r.passed(), "{:?}", r.tables["constants"]);
    let c = r.tables["constants"].column("constant");
    assert!(r.values["constant_at_half_pi"] < c[0]);
}

#[test]
fn czo_ratios() {
    let r = czo_bmo_bound_check(20, 1024, 7).unwrap();
    assert!((r.values["cos_ratio"] - 1.0).abs() < 1e-9);
    assert!(r.values["step_ratio"].is_finite() && r.values["step_ratio"] > 0.0);
    assert!(r.passed(), "{:?}", r.values);
    assert!(matches!(czo_bmo_bound_check(3, 64, 0), Err(RegularityError::TooFewTrials(3))));
}

#[test]
fn john_nirenberg_for_hilbert_of_step() {
    let g = CircleGrid::new(4096).unwrap();
    let h = hilbert_transform(&CircleFunction::from_real_fn(&g, |t| if t < PI { 1.0 } else { -1.0 }));
    let lambdas: Vec<f64> = (0..=25).map(|k| 0.5 + 0.1 * k as f64).collect();
    let r = jn_tail_fit(&h, &lambdas);
    assert!(r.passed(), "{:?}", r.fits);
    assert!(r.values["c2"] > 0.0);
}

#[test]
fn blowup_of_smooth_family_stays_bounded() {
    // Lipschitz in x, so every seminorm is at most max |dx|^(1 - beta) <= 1
    let r = holder_blowup_fit(&smooth(1024, 10), &[0.45, 0.4, 0.3, 0.2]).unwrap();
    assert!(r.tables["seminorms"].column("seminorm").iter().all(|&s| s <= 1.0));
    assert!(!r.passed(), "{}", r.values["exponent"]);
    assert!(matches!(holder_blowup_fit(&smooth(64, 5), &[0.4, 0.3]), Err(RegularityError::BadBetas(_))));
}

#[test]
fn reports_write_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let r = offaxis_holder_scan(&counterexample_family(0.5, 512, 8).unwrap()).unwrap();
    r.write_to(dir.path()).unwrap();
    let json = std::fs::read_to_string(dir.path().join("offaxis_holder.json")).unwrap();
    assert!(json.contains("constant_vs_log_weight"));
    let csv = std::fs::read_to_string(dir.path().join("offaxis_holder_constants.csv")).unwrap();
    assert!(csv.starts_with("theta0,log_weight,constant"));
}
