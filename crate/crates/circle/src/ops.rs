use crate::{CircleError, CircleFunction, HolomorphicDisc, C64};

/// Largest admissible `|tau|` for [`poisson_extend`].
pub const POISSON_RADIUS_LIMIT: f64 = 1.0 - 1e-12;

/// Harmonic conjugate on the circle: `c_m -> -i sign(m) c_m`.
///
/// The mean and the Nyquist mode (whose sign is ambiguous on an even grid)
/// are both sent to zero, so real input gives real output.
pub fn hilbert_transform(f: &CircleFunction) -> CircleFunction {
    let g = f.grid();
    let n = g.size();
    let minus_i = C64::new(0.0, -1.0);
    let coeffs: Vec<C64> = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, &c)| match g.mode_of_index(j) {
            0 => C64::new(0.0, 0.0),
            m if m == -(n as i64) / 2 => C64::new(0.0, 0.0),
            m if m > 0 => minus_i * c,
            _ => -minus_i * c,
        })
        .collect();
    let out = CircleFunction::from_coeffs(g, coeffs).expect("same grid");
    if f.is_real() {
        out.real_part()
    } else {
        out
    }
}

/// Value at `tau` of the harmonic extension of `f` into the disc.
///
/// `sum_m c_m r^|m| e^{i m eta}` with the Nyquist term extended as
/// `c Re(tau^{N/2})`, so the boundary limit reproduces every sample.
pub fn poisson_extend(f: &CircleFunction, tau: C64) -> Result<C64, CircleError> {
    let r = tau.norm();
    if r > POISSON_RADIUS_LIMIT {
        return Err(CircleError::OutsideDisk(r));
    }
    let n = f.grid().size() as i64;
    let mut acc = f.coeff(0);
    let (mut p, tau_bar) = (C64::new(1.0, 0.0), tau.conj());
    let mut pb = C64::new(1.0, 0.0);
    for m in 1..n / 2 {
        p *= tau;
        pb *= tau_bar;
        acc += f.coeff(m) * p + f.coeff(-m) * pb;
    }
    p *= tau;
    acc += f.coeff(-n / 2) * p.re;
    Ok(acc)
}

/// Holomorphic `u` on the disc with `Re u = f` on the circle and `u(-i) = anchor`.
///
/// `u` is `f + i Hil f` projected onto nonnegative modes, shifted by the
/// imaginary constant that places `Im u(-i)` at `Im anchor`. The real part of
/// the anchor must agree with `f` at `tau = -i`.
pub fn solve_riemann_hilbert(f: &CircleFunction, anchor: C64) -> Result<HolomorphicDisc, CircleError> {
    let imag = f.max_imag();
    if imag > 1e-12 {
        return Err(CircleError::NotReal(imag));
    }
    let g = f.grid();
    let mismatch = (anchor.re - f.value(g.anchor_index()).re).abs();
    if mismatch > 1e-8 {
        return Err(CircleError::IncompatibleAnchor(mismatch));
    }
    let order = HolomorphicDisc::default_order(g);
    let mut coeffs = vec![C64::new(0.0, 0.0); order + 1];
    coeffs[0] = C64::new(f.coeff(0).re, 0.0);
    for (m, a) in coeffs.iter_mut().enumerate().skip(1) {
        *a = 2.0 * f.coeff(m as i64);
    }
    let mut u = HolomorphicDisc::new(coeffs);
    let shift = anchor.im - u.eval(C64::new(0.0, -1.0)).im;
    u.coeffs_mut()[0].im += shift;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CircleGrid;
    use std::f64::consts::PI;

    /// Midpoint rule for `(1/2pi) p.v. int f(t) cot((theta - t)/2) dt`, sampled
    /// halfway between nodes so that the singular node never coincides.
    fn quadrature_hilbert(f: impl Fn(f64) -> f64, n: usize, theta: f64) -> f64 {
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|k| {
                let t = k as f64 * h;
                f(t) / ((theta - t) / 2.0).tan()
            })
            .sum::<f64>()
            * h
            / (2.0 * PI)
    }

    #[test]
    fn constant_is_annihilated() {
        let g = CircleGrid::new(64).unwrap();
        let h = hilbert_transform(&CircleFunction::from_real_fn(&g, |_| 1.0));
        assert!(h.sup_norm() < 1e-15);
        assert!(h.is_real());
    }

    #[test]
    fn cos_and_sin_against_quadrature_oracle() {
        let n = 4096;
        let g = CircleGrid::new(n).unwrap();
        let hc = hilbert_transform(&CircleFunction::from_real_fn(&g, f64::cos));
        let hs = hilbert_transform(&CircleFunction::from_real_fn(&g, f64::sin));
        let half = PI / n as f64;
        for j in (0..n).step_by(97) {
            let t = g.theta(j);
            assert!((hc.value(j).re - t.sin()).abs() < 1e-12);
            assert!((hs.value(j).re + t.cos()).abs() < 1e-12);
            // the oracle lives on midpoints; the spectral value there is the exact sin / -cos
            let q = quadrature_hilbert(f64::cos, n, t + half);
            assert!((q - (t + half).sin()).abs() < 1e-6, "cos oracle {q}");
            let q = quadrature_hilbert(f64::sin, n, t + half);
            assert!((q + (t + half).cos()).abs() < 1e-6, "sin oracle {q}");
        }
    }

    #[test]
    fn poisson_trivialities() {
        let g = CircleGrid::new(64).unwrap();
        let one = CircleFunction::from_real_fn(&g, |_| 1.0);
        assert!((poisson_extend(&one, C64::new(0.3, 0.5)).unwrap() - 1.0).norm() < 1e-14);
        let c = CircleFunction::from_real_fn(&g, f64::cos);
        assert!((poisson_extend(&c, C64::new(0.5, 0.0)).unwrap() - 0.5).norm() < 1e-14);
        assert_eq!(
            poisson_extend(&c, C64::new(1.0, 0.0)).unwrap_err(),
            CircleError::OutsideDisk(1.0)
        );
    }

    #[test]
    fn poisson_cos2_against_kernel_quadrature() {
        let g = CircleGrid::new(256).unwrap();
        let f = CircleFunction::from_real_fn(&g, |t| (2.0 * t).cos());
        let tau = C64::new(0.0, 0.5);
        let spectral = poisson_extend(&f, tau).unwrap();
        let quad: f64 = g
            .nodes()
            .iter()
            .map(|&t| {
                let q = tau * C64::from_polar(1.0, -t);
                ((1.0 + q) / (1.0 - q)).re * (2.0 * t).cos()
            })
            .sum::<f64>()
            / g.size() as f64;
        assert!((spectral.re + 0.25).abs() < 1e-14);
        assert!((quad + 0.25).abs() < 1e-12);
    }

    #[test]
    fn riemann_hilbert_closed_forms() {
        let g = CircleGrid::new(32).unwrap();
        let c = CircleFunction::from_real_fn(&g, f64::cos);
        let u = solve_riemann_hilbert(&c, C64::new(0.0, -1.0)).unwrap();
        let expect: Vec<C64> = (0..u.coeffs().len())
            .map(|k| if k == 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
            .collect();
        assert!(u.max_coeff_distance(&HolomorphicDisc::new(expect)) < 1e-15);

        let one = CircleFunction::from_real_fn(&g, |_| 1.0);
        let u = solve_riemann_hilbert(&one, C64::new(1.0, 5.0)).unwrap();
        assert!((u.eval(C64::new(0.2, 0.7)) - C64::new(1.0, 5.0)).norm() < 1e-15);

        let err = solve_riemann_hilbert(&c, C64::new(0.5, 1.0)).unwrap_err();
        assert!(matches!(err, CircleError::IncompatibleAnchor(m) if (m - 0.5).abs() < 1e-12));
    }
}
