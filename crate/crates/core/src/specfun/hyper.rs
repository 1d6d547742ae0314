//! Generalized hypergeometric series with mixed parameter kinds.
//!
//! A [`SeriesSpec`] describes
//!
//! ```text
//!   Σ_n  ∏ Γ(g_i + n) ∏ (a_i)_n  /  ( ∏ Γ(h_j + n) ∏ (b_j)_n )  ·  z^n / n!
//! ```
//!
//! so that ordinary pFq (all Pochhammer), regularized pΦq (all gamma) and the hybrids used by
//! the Meijer G expansion share one summation routine. Gamma-type denominators make the series
//! well defined when h_j is a non-positive integer: the leading terms vanish and summation
//! starts at the first non-zero index.
//!
//! Summation runs in doubles with Neumaier compensation. If max|term| / |sum| exceeds
//! [`ESCALATE_RATIO`] the series is re-summed in double-double arithmetic, and beyond
//! [`CANCELLATION_RATIO`] a cancellation error is returned.

use num_complex::Complex64;

use super::dd::CDd;
use super::gamma::{is_nonpositive_integer, log_gamma, pochhammer};
use crate::error::{Error, Result};

type C = Complex64;

pub const ESCALATE_RATIO: f64 = 1e12;
pub const CANCELLATION_RATIO: f64 = 1e24;
pub const MAX_TERMS: usize = 100_000;
const TAIL_RUN: usize = 8;

/// Parameters of a mixed gamma/Pochhammer hypergeometric series.
#[derive(Debug, Clone, Copy)]
pub struct SeriesSpec<'a> {
    pub gamma_num: &'a [C],
    pub poch_num: &'a [C],
    pub gamma_den: &'a [C],
    pub poch_den: &'a [C],
    pub z: C,
}

/// Result of a series summation with its conditioning diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOutcome {
    pub value: C,
    pub terms: usize,
    /// max |term| / |sum|
    pub ratio: f64,
    pub double_double: bool,
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: C,
    comp: C,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: C) {
        self.sum.re = neumaier(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = neumaier(self.sum.im, x.im, &mut self.comp.im);
    }

    pub fn value(&self) -> C {
        self.sum + self.comp
    }
}

#[inline]
fn neumaier(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

impl<'a> SeriesSpec<'a> {
    fn numerators(&self) -> impl Iterator<Item = C> + '_ {
        self.gamma_num.iter().chain(self.poch_num.iter()).copied()
    }

    fn denominators(&self) -> impl Iterator<Item = C> + '_ {
        self.gamma_den.iter().chain(self.poch_den.iter()).copied()
    }

    /// Index of the first term not killed by a gamma-type denominator pole.
    fn first_index(&self) -> usize {
        self.gamma_den
            .iter()
            .filter(|h| is_nonpositive_integer(**h))
            .map(|h| (1.0 - h.re) as usize)
            .max()
            .unwrap_or(0)
    }

    /// Index past which no parameter + n can come close to zero.
    fn safe_index(&self) -> usize {
        self.numerators()
            .chain(self.denominators())
            .map(|v| (-v.re).ceil().max(0.0) as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// Terminating index for Pochhammer numerators at non-positive integers.
    fn last_index(&self) -> Option<usize> {
        self.poch_num
            .iter()
            .filter(|a| is_nonpositive_integer(**a))
            .map(|a| (-a.re) as usize)
            .min()
    }

    fn validate(&self) -> Result<()> {
        for v in self.numerators().chain(self.denominators()) {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite series parameter {v}")));
            }
        }
        if !(self.z.re.is_finite() && self.z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite series argument".into()));
        }
        if self.gamma_num.len() + self.poch_num.len() > self.gamma_den.len() + self.poch_den.len() {
            return Err(Error::InvalidArgument("series needs p <= q".into()));
        }
        for &b in self.poch_den {
            if is_nonpositive_integer(b) {
                return Err(Error::Pole { arg: b, context: "hypergeometric denominator" });
            }
        }
        for &g in self.gamma_num {
            if is_nonpositive_integer(g) {
                return Err(Error::Pole { arg: g, context: "regularized hypergeometric numerator" });
            }
        }
        Ok(())
    }

    /// The term with index n0, from log-gamma and Pochhammer products.
    fn leading_term(&self, n0: usize) -> Result<C> {
        let nf = n0 as f64;
        let k = n0 as u32;
        let mut log_mag = C::new(0.0, 0.0);
        for &g in self.gamma_num {
            log_mag += log_gamma(g + nf)?;
        }
        for &h in self.gamma_den {
            log_mag -= log_gamma(h + nf)?;
        }
        if n0 > 0 {
            log_mag += self.z.ln() * nf - log_gamma(C::new(nf + 1.0, 0.0))?;
        }
        let mut lead = log_mag.exp();
        for &a in self.poch_num {
            lead *= pochhammer(a, k);
        }
        for &b in self.poch_den {
            lead /= pochhammer(b, k);
        }
        Ok(lead)
    }

    /// Ratio term(n+1)/term(n).
    #[inline]
    fn step(&self, n: f64) -> C {
        let mut num = self.z;
        for a in self.numerators() {
            num *= a + n;
        }
        let mut den = C::new(n + 1.0, 0.0);
        for b in self.denominators() {
            den *= b + n;
        }
        num / den
    }

    fn step_dd(&self, n: f64) -> CDd {
        let mut num = CDd::from_c64(self.z);
        for a in self.numerators() {
            num = num * CDd::from_c64(a).add_f64(n);
        }
        let mut den = CDd::from_c64(C::new(n + 1.0, 0.0));
        for b in self.denominators() {
            den = den * CDd::from_c64(b).add_f64(n);
        }
        num / den
    }
}

/// Outcome of one summation pass over the normalised terms (leading term = 1).
struct Pass {
    sum: C,
    max_term: f64,
    terms: usize,
}

fn sum_double(spec: &SeriesSpec, n0: usize, last: Option<usize>) -> Result<Pass> {
    let safe = spec.safe_index();
    let mut acc = KahanSum::new();
    let mut term = C::new(1.0, 0.0);
    let mut max_term = 1.0f64;
    let mut quiet = 0;
    let mut n = n0;
    loop {
        acc.add(term);
        if last == Some(n) || term == C::new(0.0, 0.0) && n >= safe {
            return Ok(Pass { sum: acc.value(), max_term, terms: n - n0 + 1 });
        }
        let ratio = spec.step(n as f64);
        term *= ratio;
        n += 1;
        let t = term.norm();
        if !t.is_finite() {
            return Err(Error::NonConvergence { terms: n - n0 });
        }
        max_term = max_term.max(t);
        if t <= f64::EPSILON * 0.5 * acc.value().norm() && ratio.norm() < 1.0 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= TAIL_RUN && n >= safe {
            acc.add(term);
            return Ok(Pass { sum: acc.value(), max_term, terms: n - n0 + 1 });
        }
        if n - n0 >= MAX_TERMS {
            return Err(Error::NonConvergence { terms: MAX_TERMS });
        }
    }
}

fn sum_double_double(spec: &SeriesSpec, n0: usize, last: Option<usize>) -> Result<Pass> {
    let safe = spec.safe_index();
    let mut acc = CDd::ZERO;
    let mut term = CDd::ONE;
    let mut max_term = 1.0f64;
    let mut quiet = 0;
    let mut n = n0;
    let tol = 1e-33;
    loop {
        acc = acc + term;
        if last == Some(n) || term == CDd::ZERO && n >= safe {
            return Ok(Pass { sum: acc.to_c64(), max_term, terms: n - n0 + 1 });
        }
        let ratio = spec.step_dd(n as f64);
        term = term * ratio;
        n += 1;
        let t = term.norm_f64();
        if !t.is_finite() {
            return Err(Error::NonConvergence { terms: n - n0 });
        }
        max_term = max_term.max(t);
        if t <= tol * acc.norm_f64() && ratio.norm_f64() < 1.0 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= TAIL_RUN && n >= safe {
            acc = acc + term;
            return Ok(Pass { sum: acc.to_c64(), max_term, terms: n - n0 + 1 });
        }
        if n - n0 >= MAX_TERMS {
            return Err(Error::NonConvergence { terms: MAX_TERMS });
        }
    }
}

fn conditioning(pass: &Pass) -> f64 {
    let s = pass.sum.norm();
    if s == 0.0 {
        if pass.max_term == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        pass.max_term / s
    }
}

/// Sum a mixed series with the precision-escalation policy.
pub fn sum_series(spec: &SeriesSpec) -> Result<SeriesOutcome> {
    spec.validate()?;
    let n0 = spec.first_index();
    let last = spec.last_index();
    let zero = SeriesOutcome { value: C::new(0.0, 0.0), terms: 0, ratio: 1.0, double_double: false };
    if let Some(l) = last {
        if l < n0 {
            return Ok(zero);
        }
    }
    if spec.z == C::new(0.0, 0.0) {
        if n0 > 0 {
            return Ok(zero);
        }
        return Ok(SeriesOutcome { value: spec.leading_term(0)?, terms: 1, ratio: 1.0, double_double: false });
    }
    let lead = spec.leading_term(n0)?;
    if lead == C::new(0.0, 0.0) {
        return Ok(zero);
    }
    let pass = sum_double(spec, n0, last)?;
    let ratio = conditioning(&pass);
    let (pass, ratio, dd) = if ratio > ESCALATE_RATIO {
        let pass = sum_double_double(spec, n0, last)?;
        let ratio = conditioning(&pass);
        if ratio > CANCELLATION_RATIO {
            return Err(Error::Cancellation { ratio });
        }
        (pass, ratio, true)
    } else {
        (pass, ratio, false)
    };
    let value = lead * pass.sum;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NonConvergence { terms: pass.terms });
    }
    Ok(SeriesOutcome { value, terms: pass.terms, ratio, double_double: dd })
}

/// pFq(a; b; z) for p ≤ q.
pub fn hyper_pfq(a: &[C], b: &[C], z: C) -> Result<C> {
    let spec = SeriesSpec { gamma_num: &[], poch_num: a, gamma_den: &[], poch_den: b, z };
    Ok(sum_series(&spec)?.value)
}

/// Regularized pΦq(a; b; z) = Γ[a; b] · pFq(a; b; z), finite when some b_j is a non-positive
/// integer.
pub fn hyper_pfq_regularized(a: &[C], b: &[C], z: C) -> Result<C> {
    let spec = SeriesSpec { gamma_num: a, poch_num: &[], gamma_den: b, poch_den: &[], z };
    Ok(sum_series(&spec)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::gamma_ratio;

    fn r(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn elementary_values() {
        let e = hyper_pfq(&[], &[], r(1.0)).unwrap();
        assert!((e.re - std::f64::consts::E).abs() < 1e-15);
        let v = hyper_pfq(&[r(1.0)], &[r(2.0)], r(1.0)).unwrap();
        assert!((v.re - (std::f64::consts::E - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn three_f_three_oracle() {
        // 3F3(1,1,1; 2,2,2; 0.5) from a 200-term exact rational series
        let v = hyper_pfq(&[r(1.0); 3], &[r(2.0); 3], r(0.5)).unwrap();
        assert!((v.re - 1.067_477_255_864_393).abs() < 1e-15, "{v}");
    }

    #[test]
    fn regularized_at_zero_is_gamma_ratio() {
        let a = [C::new(0.3, 0.2), r(1.7), C::new(2.1, -0.4)];
        let b = [r(0.9), C::new(1.1, 0.5), r(3.3)];
        let v = hyper_pfq_regularized(&a, &b, r(0.0)).unwrap();
        let g = gamma_ratio(&a, &b).unwrap();
        assert!((v - g).norm() < 1e-14 * g.norm());
        assert!((hyper_pfq_regularized(&[r(1.0)], &[r(2.0)], r(0.0)).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn regularized_denominator_pole() {
        // 1Φ1(a; -1; z) = Γ(a) Σ_{n≥2} (a)_n z^n / (Γ(n-1) n!) = Γ(a) (a)_2 z^2 1F1(a+2; 3; z) / 2
        let a = C::new(0.7, 0.1);
        let z = r(0.4);
        let v = hyper_pfq_regularized(&[a], &[r(-1.0)], z).unwrap();
        let lead = crate::specfun::gamma::gamma(a).unwrap() * a * (a + 1.0) * z * z / 2.0;
        let want = lead * hyper_pfq(&[a + 2.0], &[r(3.0)], z).unwrap();
        assert!((v - want).norm() < 1e-14 * want.norm());
    }

    #[test]
    fn terminating_series() {
        // 2F1-like truncation through a (-3)_n numerator: 1F1(-3; 2; z) is a cubic.
        let z = r(1.5);
        let v = hyper_pfq(&[r(-3.0)], &[r(2.0)], z).unwrap();
        let want = 1.0 - 3.0 * 1.5 / 2.0 + 3.0 * 1.5f64.powi(2) / 6.0 - 1.5f64.powi(3) / 24.0;
        assert!((v.re - want).abs() < 1e-15);
    }

    #[test]
    fn denominator_pole_is_error() {
        assert!(matches!(hyper_pfq(&[r(1.0)], &[r(-2.0)], r(0.5)), Err(Error::Pole { .. })));
    }

    #[test]
    fn escalates_on_cancellation() {
        // 1F1(1; 1; -20) = e^-20 with terms of size ~ 4e7.
        let spec = SeriesSpec { gamma_num: &[], poch_num: &[r(1.0)], gamma_den: &[], poch_den: &[r(1.0)], z: r(-20.0) };
        let out = sum_series(&spec).unwrap();
        assert!(out.double_double);
        assert!((out.value.re / (-20f64).exp() - 1.0).abs() < 1e-13, "{}", out.value);
    }

    #[test]
    fn hopeless_cancellation_is_error() {
        let spec = SeriesSpec { gamma_num: &[], poch_num: &[r(1.0)], gamma_den: &[], poch_den: &[r(1.0)], z: r(-40.0) };
        assert!(matches!(sum_series(&spec), Err(Error::Cancellation { .. })));
    }
}
