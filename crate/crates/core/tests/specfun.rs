use kouexp::specfun::{gamma, hyper_pfq, log_gamma, meijer_g, meijer_g_contour, MeijerGSpec};
use kouexp::{Complex64 as C, Error};
use proptest::strategy::ValueTree;
use proptest::prelude::*;
use std::f64::consts::PI;

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Distance of z to the nearest integer on the real axis (ignoring Im z).
fn frac_dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

#[test]
fn published_gamma_values() {
    assert!(log_gamma(c(1.0)).unwrap().norm() < 1e-15);
    assert!((log_gamma(c(4.0)).unwrap().re - 6f64.ln()).abs() < 1e-14);
    assert!((log_gamma(c(0.5)).unwrap().re - 0.572_364_942_924_700_1).abs() < 1e-14);
    assert!(log_gamma(c(-3.0)).is_err());
}

#[test]
fn classical_meijer_reductions() {
    // G^{1,0}_{0,1}(−; 0 | x) = e^{−x}.
    let spec = MeijerGSpec::real(1, 0, &[], &[0.0]).unwrap();
    for x in [1.0, 2.0] {
        assert!((meijer_g(&spec, x).unwrap().re - (-x).exp()).abs() < 1e-14);
        let v = meijer_g_contour(&spec, x, None).unwrap();
        assert!(rel(v, c((-x).exp())) < 1e-10, "{v}");
    }
}

#[test]
fn small_argument_order() {
    // G(x) ~ C x^{b₁} as x → 0⁺, with C the residue at the smallest leading lower parameter.
    let (a, b) = ([0.8, 2.5, 3.1], [0.35, 1.2, 1.9, -0.4]);
    let spec = MeijerGSpec::real(3, 1, &a, &b).unwrap();
    let g = |z: f64| gamma(c(z)).unwrap().re;
    let lead = g(b[1] - b[0]) * g(b[2] - b[0]) * g(1.0 - a[0] + b[0]) / (g(a[1] - b[0]) * g(a[2] - b[0]) * g(1.0 - b[3] + b[0]));
    let mut last = f64::INFINITY;
    for k in 3..=10 {
        let x = 10f64.powi(-k);
        let err = (meijer_g(&spec, x).unwrap().re / x.powf(b[0]) / lead - 1.0).abs();
        // The next residue is a factor x^{0.85} smaller.
        assert!(err < 10.0 * x.powf(0.85) && err < last, "{x}: {err}");
        last = err;
    }
}

/// Leading lower parameters with pairwise non-integer gaps, for G^{3,1}_{3,4}. Arguments stay
/// below 2.5, where the residue series is the intended evaluation path.
fn g3134() -> impl Strategy<Value = (MeijerGSpec, f64)> {
    (
        prop::array::uniform4(0.0f64..2.0),
        prop::array::uniform3(-0.3f64..0.3),
        0.0f64..0.9,
        prop::array::uniform2(1.0f64..4.0),
        0.1f64..2.5,
    )
        .prop_filter("well separated", |(b, _, _, _, _)| {
            (0..3).all(|j| (j + 1..3).all(|k| frac_dist(b[j] - b[k]) > 0.05))
        })
        .prop_map(|(b, bi, a1, rest, x)| {
            let lower = b[0].min(b[1]).min(b[2]);
            let bs = vec![
                C::new(b[0], bi[0]),
                C::new(b[1], bi[1]),
                C::new(b[2], bi[2]),
                c(b[3] - 1.5),
            ];
            // Condition A: a₁ − 1 < min Re bⱼ.
            let a = vec![c(a1 + lower - 0.9), c(rest[0] + 0.5), c(rest[1] + 1.0)];
            (MeijerGSpec::new(3, 1, a, bs).unwrap(), x)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection(re in -5.0f64..5.0, im in -3.0f64..3.0) {
        prop_assume!(im.abs() > 0.1 || frac_dist(re) > 0.1);
        let z = C::new(re, im);
        let v = gamma(z).unwrap() * gamma(1.0 - z).unwrap() * (PI * z).sin() / PI;
        prop_assert!((v - 1.0).norm() < 1e-12, "{z}: {v}");
    }

    #[test]
    fn contiguous_four_three(
        a in prop::array::uniform3(-2.0f64..3.0), b in prop::array::uniform3(1.3f64..4.0),
        ai in prop::array::uniform3(-1.0f64..1.0), zr in -2.0f64..2.0, zi in -2.0f64..2.0,
    ) {
        let al: Vec<C> = (0..3).map(|i| C::new(a[i], ai[i])).collect();
        let be: Vec<C> = b.iter().map(|&v| c(v)).collect();
        let z = C::new(zr, zi);
        let factor: C = (0..3).map(|i| (al[i] - 1.0) / (be[i] - 1.0)).product();
        let f44 = hyper_pfq(&[c(1.0), al[0], al[1], al[2]], &[c(2.0), be[0], be[1], be[2]], z).unwrap();
        let lhs = 1.0 + z * factor * f44;
        let am1: Vec<C> = al.iter().map(|v| v - 1.0).collect();
        let bm1: Vec<C> = be.iter().map(|v| v - 1.0).collect();
        let rhs = hyper_pfq(&am1, &bm1, z).unwrap();
        let scale = 1.0 + (z * factor * f44).norm();
        prop_assert!((lhs - rhs).norm() < 1e-12 * scale, "{lhs} {rhs}");
    }
}

/// The residue series, or `None` when it declines because its rounding budget is exceeded.
fn series_or_decline(spec: &MeijerGSpec, x: f64) -> Option<C> {
    match meijer_g(spec, x) {
        Ok(v) => Some(v),
        Err(Error::Cancellation { .. }) => None,
        Err(e) => panic!("{e:?}"),
    }
}

#[test]
fn series_evaluates_most_draws() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = g3134();
    let draws = 400;
    let declined = (0..draws)
        .filter(|_| {
            let (spec, x) = strategy.new_tree(&mut runner).unwrap().current();
            series_or_decline(&spec, x).is_none()
        })
        .count();
    assert!(declined * 2 < draws, "{declined} of {draws} declined");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shift_identity((spec, x) in g3134(), cr in -1.0f64..1.0, ci in -1.0f64..1.0) {
        let cc = C::new(cr, ci);
        let (Some(base), Some(rhs)) = (series_or_decline(&spec, x), series_or_decline(&spec.shifted(cc), x)) else {
            return Ok(());
        };
        let lhs = (cc * x.ln()).exp() * base;
        prop_assert!(rel(lhs, rhs) < 1e-9, "{lhs} {rhs}");
    }

    #[test]
    fn series_matches_contour((spec, x) in g3134()) {
        let contour = meijer_g_contour(&spec, x, None).unwrap();
        if let Some(series) = series_or_decline(&spec, x) {
            prop_assert!(rel(series, contour) < 1e-9, "{series} {contour}");
        }
    }

    #[test]
    fn inversion_identity((spec, x) in g3134()) {
        let direct = meijer_g_contour(&spec, x, None).unwrap();
        let inverted = meijer_g_contour(&spec.inverted(), 1.0 / x, None).unwrap();
        prop_assert!(rel(inverted, direct) < 1e-10, "{inverted} {direct}");
    }

    #[test]
    fn conjugate_symmetry((spec, x) in g3134()) {
        let a = meijer_g_contour(&spec, x, None).unwrap();
        let b = meijer_g_contour(&spec.conj(), x, None).unwrap();
        prop_assert!(rel(a.conj(), b) < 1e-12, "{a} {b}");
    }
}
