//! Complex gamma function and friends.
//!
//! `log_gamma` returns the principal branch of log Γ, i.e. the analytic continuation of the
//! real log-gamma from the positive axis to C \ (-∞, 0]. It shifts the argument up with
//! Γ(z) = Γ(z + N) / (z (z+1) ... (z+N-1)) until Re z ≥ 10 and applies the Stirling series
//! there. Summing principal logarithms of the shift factors keeps the branch consistent
//! without a separate reflection step.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const SHIFT_TARGET: f64 = 10.0;

/// B_{2k} / (2k (2k - 1)) for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// True when `z` is exactly 0, -1, -2, ...
pub fn is_nonpositive_integer(z: C) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

fn check_finite(z: C, context: &'static str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("non-finite argument {z} in {context}")))
    }
}

fn stirling(w: C) -> C {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut corr = C::new(0.0, 0.0);
    for &c in STIRLING.iter().rev() {
        corr = corr * inv2 + c;
    }
    (w - 0.5) * w.ln() - w + HALF_LN_2PI + corr * inv
}

/// Principal-branch log Γ(z).
pub fn log_gamma(z: C) -> Result<C> {
    check_finite(z, "log_gamma")?;
    if is_nonpositive_integer(z) {
        return Err(Error::Pole { arg: z, context: "log_gamma" });
    }
    Ok(log_gamma_unchecked(z))
}

fn log_gamma_unchecked(z: C) -> C {
    // A signed zero imaginary part would flip the branch on the negative axis; the
    // principal branch there is the limit from the upper half plane.
    let mut w = if z.im == 0.0 { C::new(z.re, 0.0) } else { z };
    let mut shift = C::new(0.0, 0.0);
    while w.re < SHIFT_TARGET {
        shift += w.ln();
        w += 1.0;
    }
    stirling(w) - shift
}

/// Γ(z).
pub fn gamma(z: C) -> Result<C> {
    Ok(log_gamma(z)?.exp())
}

/// 1/Γ(z), an entire function: zero at the poles of Γ.
pub fn rgamma(z: C) -> C {
    if is_nonpositive_integer(z) {
        C::new(0.0, 0.0)
    } else {
        (-log_gamma_unchecked(z)).exp()
    }
}

/// Numerator and denominator arguments of Γ[a_1, ..., a_p; b_1, ..., b_q].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GammaRatioSpec {
    pub numerators: Vec<C>,
    pub denominators: Vec<C>,
}

impl GammaRatioSpec {
    pub fn new(numerators: Vec<C>, denominators: Vec<C>) -> Self {
        Self { numerators, denominators }
    }

    pub fn eval(&self) -> Result<C> {
        gamma_ratio(&self.numerators, &self.denominators)
    }
}

/// ∏Γ(a_i) / ∏Γ(b_j) evaluated in log space. Any argument at a pole is an error.
pub fn gamma_ratio(num: &[C], den: &[C]) -> Result<C> {
    Ok(log_gamma_ratio(num, den)?.exp())
}

/// log of ∏Γ(a_i) / ∏Γ(b_j), up to a multiple of 2πi.
pub fn log_gamma_ratio(num: &[C], den: &[C]) -> Result<C> {
    let mut acc = C::new(0.0, 0.0);
    for &a in num {
        check_finite(a, "gamma_ratio")?;
        if is_nonpositive_integer(a) {
            return Err(Error::Pole { arg: a, context: "gamma_ratio numerator" });
        }
        acc += log_gamma_unchecked(a);
    }
    for &b in den {
        check_finite(b, "gamma_ratio")?;
        if is_nonpositive_integer(b) {
            return Err(Error::Pole { arg: b, context: "gamma_ratio denominator" });
        }
        acc -= log_gamma_unchecked(b);
    }
    Ok(acc)
}

/// ∏Γ(a_i) / ∏Γ(b_j) where a denominator pole gives zero instead of an error.
pub fn gamma_ratio_entire(num: &[C], den: &[C]) -> Result<C> {
    if den.iter().any(|&b| is_nonpositive_integer(b)) {
        for &a in num {
            if is_nonpositive_integer(a) {
                return Err(Error::Pole { arg: a, context: "gamma_ratio numerator" });
            }
        }
        return Ok(C::new(0.0, 0.0));
    }
    gamma_ratio(num, den)
}

/// Pochhammer symbol (a)_k = Γ(a+k)/Γ(a).
pub fn pochhammer(a: C, k: u32) -> C {
    if k <= 64 || is_nonpositive_integer(a) {
        let mut p = C::new(1.0, 0.0);
        for i in 0..k {
            let f = a + f64::from(i);
            if f == C::new(0.0, 0.0) {
                return f;
            }
            p *= f;
        }
        return p;
    }
    let ak = a + f64::from(k);
    (log_gamma_unchecked(ak) - log_gamma_unchecked(a)).exp()
}

/// sin(πz) with exact zeros at the integers and reduced argument for large |Re z|.
pub fn sin_pi(z: C) -> C {
    let n = z.re.round();
    let r = z.re - n;
    let sign = if (n as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let w = C::new(std::f64::consts::PI * r, std::f64::consts::PI * z.im);
    w.sin() * sign
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn log_gamma_small_integers() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(log_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-14);
        let v = log_gamma(c(4.0, 0.0)).unwrap();
        assert!((v.re - 6f64.ln()).abs() < 1e-14 && v.im == 0.0);
        let v = log_gamma(c(0.5, 0.0)).unwrap();
        assert!((v.re - 0.572_364_942_924_700_1).abs() < 1e-14);
    }

    #[test]
    fn log_gamma_poles() {
        for z in [0.0, -1.0, -7.0] {
            assert!(matches!(log_gamma(c(z, 0.0)), Err(Error::Pole { .. })));
        }
    }

    #[test]
    fn log_gamma_matches_mpmath() {
        // mpmath.loggamma at 30 digits
        let cases = [
            (c(0.3, 2.0), c(-2.359_449_355_937_571, -0.916_907_613_518_669_8)),
            (c(-2.5, 0.7), c(-1.494_187_308_911_357_5, -8.646_475_682_803_377)),
            (c(25.0, -30.0), c(39.427_996_866_863_05, -101.408_028_253_933_79)),
            (c(-3.7, 0.0), c(-1.379_739_904_965_824_5, -12.566_370_614_359_173)),
            (c(-3.7, -0.0), c(-1.379_739_904_965_824_5, -12.566_370_614_359_173)),
            (c(1e-3, -1e-3), c(6.560_604_473_837_553, 0.785_973_734_929_653_4)),
        ];
        for (z, want) in cases {
            let got = log_gamma(z).unwrap();
            assert!((got - want).norm() <= 1e-13 * want.norm().max(1.0), "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn gamma_ratio_examples() {
        assert!((gamma_ratio(&[c(3.0, 0.0)], &[c(2.0, 0.0)]).unwrap() - 2.0).norm() < 1e-14);
        assert!((gamma_ratio(&[c(1.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap() - 1.0).norm() < 1e-14);
        assert!((gamma_ratio(&[c(5.5, 0.0)], &[c(4.5, 0.0)]).unwrap() - 4.5).norm() < 1e-13);
        assert!(matches!(
            gamma_ratio(&[c(1.0, 0.0)], &[c(-2.0, 0.0)]),
            Err(Error::Pole { context: "gamma_ratio denominator", .. })
        ));
        assert_eq!(gamma_ratio_entire(&[c(1.5, 0.0)], &[c(-2.0, 0.0)]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(c(3.3, 1.0), 0), c(1.0, 0.0));
        assert_eq!(pochhammer(c(1.0, 0.0), 4), c(24.0, 0.0));
        assert_eq!(pochhammer(c(-2.0, 0.0), 3), c(0.0, 0.0));
        let big = pochhammer(c(0.5, 0.25), 80);
        let mut prod = c(1.0, 0.0);
        for i in 0..80 {
            prod *= c(0.5 + f64::from(i), 0.25);
        }
        assert!((big - prod).norm() < 1e-12 * prod.norm());
    }

    #[test]
    fn rgamma_is_entire() {
        assert_eq!(rgamma(c(-3.0, 0.0)), c(0.0, 0.0));
        let near = rgamma(c(-3.0 + 1e-9, 0.0));
        assert!((near.re - (-6.0 * 1e-9)).abs() < 1e-15);
    }

    #[test]
    fn sin_pi_exact_zeros() {
        assert_eq!(sin_pi(c(7.0, 0.0)).norm(), 0.0);
        assert!((sin_pi(c(0.5, 0.0)) - 1.0).norm() < 1e-16);
        assert!((sin_pi(c(101.5, 0.0)) + 1.0).norm() < 1e-16);
    }
}
