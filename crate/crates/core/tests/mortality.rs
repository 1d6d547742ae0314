use kouexp::mortality::{fit_exponential_sum, fit_samples, ExpSum, GompertzMakeham};
use kouexp::quad::gauss_kronrod;
use kouexp::{Complex64 as C, Error};
use proptest::prelude::*;

fn age_65_law() -> GompertzMakeham {
    GompertzMakeham::new(65.0, 0.0007, 0.00005, 10f64.powf(0.04)).unwrap()
}

fn sorted_nodes(s: &ExpSum) -> Vec<(C, C)> {
    let mut v: Vec<(C, C)> = s.terms.iter().map(|k| (k.s(), k.w())).collect();
    v.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    v
}

#[test]
fn density_integrates_to_one() {
    let gm = age_65_law();
    let mass = gauss_kronrod(|t| gm.density(t), 0.0, 120.0, 1e-14, 1e-13).unwrap().value;
    assert!((mass + gm.survival(120.0) - 1.0).abs() < 1e-9, "{mass}");
    assert!(gm.survival(120.0) < 1e-12);
}

#[test]
fn density_is_minus_survival_slope() {
    let gm = age_65_law();
    for t in [5.0, 20.0, 40.0] {
        let h = 1e-4;
        let fd = -(gm.survival(t + h) - gm.survival(t - h)) / (2.0 * h);
        assert!((fd - gm.density(t)).abs() < 1e-9, "{t}");
    }
}

#[test]
fn two_terms_recovered() {
    let s = fit_samples(|t| (-t).exp() + (-2.0 * t).exp(), 2, 10.0, 512).unwrap();
    let v = sorted_nodes(&s);
    assert!((v[0].0 - 1.0).norm() < 1e-8 && (v[1].0 - 2.0).norm() < 1e-8, "{v:?}");
    assert!((v[0].1 - 1.0).norm() < 1e-8 && (v[1].1 - 1.0).norm() < 1e-8, "{v:?}");
}

#[test]
fn damped_oscillation_recovered() {
    // 0.3 e^{−0.1t} + e^{−0.5t} cos t = 0.3 e^{−0.1t} + ½ e^{−(0.5−i)t} + ½ e^{−(0.5+i)t}.
    let s = fit_samples(|t| 0.3 * (-0.1 * t).exp() + (-0.5 * t).exp() * t.cos(), 3, 40.0, 1024).unwrap();
    let v = sorted_nodes(&s);
    let want = [
        (C::new(0.1, 0.0), C::new(0.3, 0.0)),
        (C::new(0.5, -1.0), C::new(0.5, 0.0)),
        (C::new(0.5, 1.0), C::new(0.5, 0.0)),
    ];
    for ((s, w), (ws, ww)) in v.iter().zip(want) {
        assert!((s - ws).norm() < 1e-8 && (w - ww).norm() < 1e-8, "{s} {w}");
    }
}

#[test]
fn too_many_terms_is_rank_deficient() {
    let r = fit_samples(|t| (-t).exp() + (-2.0 * t).exp(), 4, 10.0, 512);
    assert!(matches!(r, Err(Error::RankDeficient(_))), "{r:?}");
    assert!(matches!(fit_samples(|t| (-t).exp(), 300, 10.0, 512), Err(Error::RankDeficient(_))));
}

#[test]
fn mortality_fit_meets_bound() {
    let gm = age_65_law();
    let s = fit_exponential_sum(&gm, 15, 100.0, 2048).unwrap();
    assert_eq!(s.terms.len(), 15);
    assert!(s.sup_error < 1e-6, "{}", s.sup_error);
    // Off the fitting grid as well.
    let worst = (0..=20_000)
        .map(|i| 100.0 * i as f64 / 20_000.0)
        .map(|t| (s.eval(t).re - gm.density(t)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
    for i in 0..=2000 {
        let v = s.eval(0.05 * i as f64);
        assert!(v.im.abs() <= 1e-12, "{v}");
    }
    assert!(s.terms.iter().all(|k| k.s_re > 0.0));
    assert!(s.clone().require(1e-6).is_ok());
    assert!(matches!(s.require(1e-12), Err(Error::FitTolerance { .. })));
}

#[test]
fn error_decreases_with_terms() {
    let gm = age_65_law();
    let errs: Vec<f64> =
        [5, 10, 15].iter().map(|&m| fit_exponential_sum(&gm, m, 100.0, 2048).unwrap().sup_error).collect();
    assert!(errs[0] >= errs[1] && errs[1] >= errs[2], "{errs:?}");
}

#[test]
fn json_round_trip_is_exact() {
    let s = fit_exponential_sum(&age_65_law(), 10, 100.0, 2048).unwrap();
    let text = s.to_json().unwrap();
    let back = ExpSum::from_json(&text).unwrap();
    assert_eq!(s, back);
    assert!(text.contains("\"s_re\"") && text.contains("\"sup_error\""));
    let growing = r#"{"terms":[{"s_re":-1,"s_im":0,"w_re":1,"w_im":0}],"horizon":1,"sup_error":0}"#;
    assert!(ExpSum::from_json(growing).is_err());
    assert!(ExpSum::from_json(r#"{"terms":[],"horizon":1,"sup_error":0,"extra":1}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn separated_sums_recovered(
        s1 in 0.05f64..0.5, gap1 in 0.1f64..0.5, gap2 in 0.1f64..0.5,
        w1 in 0.2f64..2.0, w2 in 0.2f64..2.0, w3 in 0.2f64..2.0,
    ) {
        let nodes = [s1, s1 + gap1, s1 + gap1 + gap2];
        let weights = [w1, w2, w3];
        let f = |t: f64| nodes.iter().zip(weights).map(|(s, w)| w * (-s * t).exp()).sum::<f64>();
        let fit = fit_samples(f, 3, 30.0, 1024).unwrap();
        let v = sorted_nodes(&fit);
        for ((s, w), (ws, ww)) in v.iter().zip(nodes.iter().zip(weights)) {
            prop_assert!((s - ws).norm() < 1e-8, "{s} {ws}");
            prop_assert!((w - ww).norm() < 1e-8, "{w} {ww}");
        }
    }
}
