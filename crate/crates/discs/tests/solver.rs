use std::sync::Arc;

use hcma_circle::{CircleGrid, HolomorphicDisc, C64};
use hcma_discs::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn grid() -> CircleGrid {
    CircleGrid::new(128).unwrap()
}

fn nine_nodes() -> SpatialGrid {
    SpatialGrid::tensor(vec![c(0.0, 0.0)], 0.25, 3).unwrap()
}

fn cfg() -> NashMoserConfig {
    NashMoserConfig::default()
}

#[test]
fn trivial_foliation_examples() {
    let rho = Euclidean { dim: 1 };
    let spatial = SpatialGrid::list(vec![vec![c(1.0, 1.0)]]).unwrap();
    let fam = trivial_foliation(&rho, &spatial, &grid());
    for tau in [c(0.0, -1.0), c(0.3, 0.2), c(1.0, 0.0)] {
        assert_eq!(fam.z_at(0, tau), vec![c(1.0, 1.0)]);
        assert_eq!(fam.xi_at(0, tau), vec![c(1.0, -1.0)]);
    }
    assert_eq!(sup_residual(&fam, &rho, &ChartBox::cube(1, 2.0)).unwrap(), 0.0);

    let shifted = ExpressionPotential::parse("z1*zb1 + 0.01*re(z1^2)", 1).unwrap();
    let w = [c(0.3, -0.4)];
    let fam = trivial_foliation(&shifted, &SpatialGrid::list(vec![w.to_vec()]).unwrap(), &grid());
    let (fd, _, _) = fd_derivatives(|z| shifted.value(z, 0.0), &w, 1e-5);
    assert!((fam.xi_at(0, c(0.2, 0.0))[0] - fd[0]).norm() < 1e-9);
}

#[test]
fn trivial_family_against_perturbed_potential() {
    let rho = Euclidean { dim: 1 };
    let eps = 0.01;
    let pot = ExpressionPotential::parse("z*zb + 0.01*cos(theta)*z*zb", 1).unwrap();
    let fam = trivial_foliation(&rho, &nine_nodes(), &grid());
    // T = -eps cos(theta) conj(w), so sup |T| = eps max |w|
    let expected = eps * 0.25 * 2f64.sqrt();
    let r = sup_residual(&fam, &pot, &ChartBox::cube(1, 1.0)).unwrap();
    assert!((r - expected).abs() < 1e-15, "{r} {expected}");
}

#[test]
fn trivial_problem_is_a_fixed_point() {
    let rho = Euclidean { dim: 1 };
    let (fam, summary) = solve_discs(&rho, &rho, &nine_nodes(), &grid(), &ChartBox::cube(1, 1.0), &cfg()).unwrap();
    assert!(summary.iterations <= 2);
    assert!(*summary.residual_history.last().unwrap() <= 1e-12);
    assert_eq!(fam, trivial_foliation(&rho, &nine_nodes(), &grid()));
}

#[test]
fn translation_family_is_recovered() {
    let t = Translation::standard(0.05, 1);
    let rho = Euclidean { dim: 1 };
    let chart = ChartBox::cube(1, 1.0);
    let (fam, summary) = solve_discs(&t, &rho, &nine_nodes(), &grid(), &chart, &cfg()).unwrap();
    let exact = t.exact_family(&nine_nodes(), &grid());
    assert!(fam.trace_distance(&exact) <= 1e-8, "{}", fam.trace_distance(&exact));
    assert!(fam.fixed_point_error() <= 1e-9);
    assert!(fam.holomorphy_defect() <= 1e-10);
    assert!(sup_residual(&fam, &t, &chart).unwrap() <= cfg().residual_tol);
    let fol = summary.foliation.unwrap();
    assert!((fol.min_abs_det - 1.0).abs() < 1e-8, "{fol:?}");
    assert!(sup_residual(&exact, &t, &chart).unwrap() <= 1e-15);
}

#[test]
fn literal_translation_formula_is_off_by_eps() {
    // z = w - eps sigma, xi = conj(w) - eps conj(sigma) on the circle
    let (eps, g) = (0.05, grid());
    let t = Translation::standard(eps, 1);
    let w = c(0.1, -0.2);
    let mut worst = 0.0f64;
    for (j, tau) in g.points().into_iter().enumerate() {
        let s = t.sigma_at(tau)[0];
        let z = w - eps * s;
        let xi = w.conj() - eps * s.conj();
        worst = worst.max((xi - t.grad(&[z], g.theta(j))[0]).norm());
    }
    // the residual is eps conj(sigma), whose sup over the circle is eps (at tau = i)
    assert!((worst - eps).abs() < 1e-15, "{worst}");
}

#[test]
fn translation_in_two_dimensions() {
    let sigma = vec![vec![c(-0.25, 0.0), c(0.0, 0.5), c(0.25, 0.0)], vec![]];
    let t = Translation::new(0.05, sigma);
    assert!(t.sigma_at(c(0.0, -1.0))[0].norm() < 1e-16);
    let spatial = SpatialGrid::tensor(vec![c(0.0, 0.0); 2], 0.25, 3).unwrap();
    let (fam, _) = solve_discs(&t, &Euclidean { dim: 2 }, &spatial, &grid(), &ChartBox::cube(2, 1.0), &cfg()).unwrap();
    assert!(fam.trace_distance(&t.exact_family(&spatial, &grid())) <= 1e-8);
}

#[test]
fn one_step_solves_the_translation_problem() {
    let t = Translation::standard(0.05, 1);
    let rho = Euclidean { dim: 1 };
    let chart = ChartBox::cube(1, 1.0);
    let start = trivial_foliation(&rho, &nine_nodes(), &grid());
    let (next, report) = newton_step(&start, &t, &chart, &cfg(), 1).unwrap();
    // the boundary condition is affine in (z, xi), so the step is exact
    assert!(next.trace_distance(&t.exact_family(&nine_nodes(), &grid())) <= 1e-12);
    assert!(report.residual_after <= 1e-13);
    let (again, report) = newton_step(&next, &t, &chart, &cfg(), 2).unwrap();
    assert!(report.correction <= 1e-12);
    assert!(again.distance(&next) <= 1e-12);
}

fn quartic_history(mode: Mode) -> (DiscFamily, SolveSummary) {
    let q = Quartic::new(1, 0.3);
    let rho = Euclidean { dim: 1 };
    let spatial = SpatialGrid::tensor(vec![c(0.1, 0.05)], 0.2, 3).unwrap();
    let cfg = NashMoserConfig { mode, residual_tol: 1e-13, ..cfg() };
    solve_discs(&q, &rho, &spatial, &grid(), &ChartBox::cube(1, 1.0), &cfg).unwrap()
}

#[test]
fn newton_converges_quadratically_on_quartic() {
    let (fam, summary) = quartic_history(Mode::PlainNewton);
    let h = &summary.residual_history;
    assert!(h.windows(2).skip(1).all(|w| w[1] < w[0]), "{h:?}");
    let constants: Vec<f64> = h.windows(2).filter(|w| w[1] > 1e-14).map(|w| w[1] / (w[0] * w[0])).collect();
    assert!(!constants.is_empty() && constants.len() <= 4, "{h:?}");
    let fitted = constants.iter().take(3).cloned().fold(0.0, f64::max);
    assert!(fitted < 50.0, "{constants:?} {h:?}");
    assert!(fam.fixed_point_error() <= 1e-9);
    assert!(summary.foliation.unwrap().min_abs_det > 0.5);
}

#[test]
fn zehnder_schedule_agrees_with_newton() {
    let (plain, _) = quartic_history(Mode::PlainNewton);
    let (z, summary) = quartic_history(Mode::ZehnderSchedule);
    let cuts: Vec<usize> = summary.steps.iter().map(|s| s.cutoff.unwrap()).collect();
    assert!(cuts.windows(2).all(|w| w[1] <= w[0]), "{cuts:?}");
    assert!(*cuts.last().unwrap() >= (0.25 * 63.0f64).ceil() as usize);
    assert!(z.trace_distance(&plain) < 1e-10, "{}", z.trace_distance(&plain));
    let c = cfg();
    assert_eq!(c.cutoff(63, 1), (63.0 * (-0.75f64).exp() + 16.0).ceil() as usize);
    assert_eq!(c.cutoff(63, 40), 16);
}

#[test]
fn local_uniqueness_basin() {
    let q = Quartic::new(1, 0.3);
    let chart = ChartBox::cube(1, 1.0);
    let (fam, _) = quartic_history(Mode::PlainNewton);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut noisy = fam.clone();
    for node in noisy.nodes.iter_mut() {
        for (k, d) in node.z.iter_mut().chain(node.xi.iter_mut()).enumerate() {
            let mut coeffs = vec![c(0.0, 0.0); d.order() + 1];
            for a in coeffs.iter_mut().take(6) {
                *a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let mut noise = HolomorphicDisc::new(coeffs);
            if k == 0 {
                // keep z(-i) = w
                let at = noise.eval(c(0.0, -1.0));
                noise.coeffs_mut()[0] -= at;
            }
            let noise = noise.scale(c(0.01 / noise.abs_sum(), 0.0));
            *d = d.add(&noise);
        }
    }
    assert!(noisy.distance(&fam) > 1e-4);
    let cfg = NashMoserConfig { residual_tol: 1e-13, ..cfg() };
    let (back, _) = iterate_from(noisy, &q, &chart, &cfg).unwrap();
    assert!(back.trace_distance(&fam) <= 1e-7, "{}", back.trace_distance(&fam));
}

#[test]
fn residual_decreases_monotonically() {
    let rho = Euclidean { dim: 1 };
    let chart = ChartBox::cube(1, 1.0);
    let pots: Vec<Box<dyn Potential>> = vec![
        Box::new(Translation::standard(0.05, 1)),
        Box::new(Quartic::new(1, 0.02)),
        Box::new(ExpressionPotential::parse("z*zb + 0.05*cos(theta)*re(z^3)", 1).unwrap()),
    ];
    for p in &pots {
        let (_, s) = solve_discs(p.as_ref(), &rho, &nine_nodes(), &grid(), &chart, &cfg()).unwrap();
        let h = &s.residual_history;
        assert!(h.windows(2).skip(1).all(|w| w[1] <= w[0]), "{h:?}");
    }
}

#[test]
fn gauge_shift_moves_only_xi() {
    let chart = ChartBox::cube(1, 1.0);
    let t: SharedPotential = Arc::new(Translation::standard(0.05, 1));
    let rho: SharedPotential = Arc::new(Euclidean { dim: 1 });
    let (base, _) = solve_discs(t.as_ref(), rho.as_ref(), &nine_nodes(), &grid(), &chart, &cfg()).unwrap();
    for (src, constant) in [("0.02*re(z1^2)", None), ("0.02*re(z1)", Some(0.01)), ("0", None)] {
        let h: SharedPotential = Arc::new(ExpressionPotential::parse(src, 1).unwrap());
        let pot = GaugeShifted { base: t.clone(), gauge: h.clone() };
        let rho2 = GaugeShifted { base: rho.clone(), gauge: h.clone() };
        let (shifted, _) = solve_discs(&pot, &rho2, &nine_nodes(), &grid(), &chart, &cfg()).unwrap();
        let r = gauge_shift_check(&base, &shifted, h.as_ref(), &chart, 3).unwrap();
        assert!(r.passed, "{src}: {r:?}");
        if let Some(k) = constant {
            let d = shifted.xi_at(4, c(0.3, 0.1))[0] - base.xi_at(4, c(0.3, 0.1))[0];
            assert!((d - k).norm() < 1e-12);
        }
    }
    let bad = ExpressionPotential::parse("0.02*z1*zb1", 1).unwrap();
    assert!(matches!(gauge_shift_check(&base, &base, &bad, &chart, 3), Err(DiscError::NotSameForm(_))));
}

#[test]
fn smallness_examples() {
    let rho = Euclidean { dim: 1 };
    let chart = ChartBox::cube(1, 1.0);
    let r = smallness_check(&Translation::standard(0.05, 1), &rho, &chart, 0.5, SMALLNESS_THRESHOLD, 1);
    assert!(r.sup_norm <= 0.05 + 1e-15 && r.sup_norm > 0.049, "{r:?}");
    assert_eq!(r.verdict, Verdict::Pass);
    let r = smallness_check(&rho, &rho, &chart, 0.5, SMALLNESS_THRESHOLD, 1);
    assert_eq!((r.sup_norm, r.holder_seminorm), (0.0, 0.0));
    let r = smallness_check(&Translation::standard(1.0, 1), &rho, &chart, 0.5, SMALLNESS_THRESHOLD, 1);
    assert_eq!(r.verdict, Verdict::Warn);
}

#[test]
fn failures_are_reported() {
    let rho = Euclidean { dim: 1 };
    let t = Translation::standard(0.5, 1);
    let tight = ChartBox::cube(1, 0.3);
    assert!(matches!(
        solve_discs(&t, &rho, &nine_nodes(), &grid(), &tight, &cfg()),
        Err(DiscError::LeftChart { .. })
    ));
    let q = Quartic::new(1, 0.3);
    let one = NashMoserConfig { max_outer_iterations: 1, ..cfg() };
    match solve_discs(&q, &rho, &nine_nodes(), &grid(), &ChartBox::cube(1, 1.0), &one) {
        Err(DiscError::NoConvergence { iterations: 1, history, .. }) => assert_eq!(history.len(), 2),
        other => panic!("{other:?}"),
    }
    let bad = NashMoserConfig { beta: 0.6, ..cfg() };
    assert!(matches!(bad.validate(), Err(DiscError::InvalidConfig(_))));
}

#[test]
fn foliation_check_on_demand_matches_grid() {
    let q = Quartic::new(1, 0.3);
    let rho = Euclidean { dim: 1 };
    let chart = ChartBox::cube(1, 1.0);
    let spatial = SpatialGrid::tensor(vec![c(0.1, 0.05)], 0.02, 3).unwrap();
    let (fam, _) = solve_discs(&q, &rho, &spatial, &grid(), &chart, &cfg()).unwrap();
    let taus = foliation_samples();
    let grid_jac = node_jacobians(&fam, 4, &taus, &q, &rho, &chart, &cfg()).unwrap();
    let single = SpatialGrid::list(vec![fam.spatial.nodes[4].clone()]).unwrap();
    let alone = DiscFamily { grid: fam.grid.clone(), spatial: single, nodes: vec![fam.nodes[4].clone()] };
    let demand = node_jacobians(&alone, 0, &taus, &q, &rho, &chart, &cfg()).unwrap();
    for (a, b) in grid_jac.iter().zip(&demand) {
        // centered differences at spacing 0.02 against 1e-3
        assert!((a - b).amax() < 1e-3, "{a} {b}");
    }
    let node = solve_node(&fam.spatial.nodes[4], &q, &rho, &fam.grid, &chart, &cfg()).unwrap();
    assert!(node.distance(&fam.nodes[4]) < 1e-10);
}

#[test]
fn family_csv_layout() {
    let t = Translation::standard(0.05, 1);
    let fam = t.exact_family(&nine_nodes(), &CircleGrid::new(16).unwrap());
    let mut buf = Vec::new();
    fam.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "node,component,k,re,im");
    assert_eq!(lines.len(), 1 + 9 * 2 * 8);
    assert!(lines[2].starts_with("0,z1,1,2.5"));
    let mut buf = Vec::new();
    fam.write_nodes_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("node,re_w1,im_w1\n0,-2.5"));
}
