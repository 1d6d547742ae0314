//! Distribution of the exponential functional I_{x,q} = x·e^{X_e} + ∫₀^e e^{X_s} ds of a Kou
//! process stopped at an independent exponential time e of rate q.
//!
//! Everything is expressed through the roots of ψ(z) = q. With A = σ²/2, X = 1/(Ax):
//! * for y < x the law is a two-term sum over the negative roots of ₃Φ₃(X) times a Meijer G
//!   function of 1/(Ay);
//! * for y > x it is a two-term sum over the positive roots of ₃F₃ / ₄F₄ series in −1/(Ay),
//!   whose coefficients involve the Mellin transform M_{x,q}(s) = E[I^{s−1}] at s = ζ₁, ζ₂.
//!
//! Complex q is supported throughout (the roots are then continued from Re q); for real q the
//! real-valued wrappers check that the imaginary part is rounding noise and drop it.

mod identity;

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kou::{laplace_exponent, psi_prime, solve_roots, KouParams, Root, RootSystem};
use crate::quad::{integrate_line, LineQuad};
use crate::specfun::gamma::{gamma_ratio_entire, log_gamma_ratio};
use crate::specfun::meijer::{meijer_g, meijer_g_contour, MeijerGSpec, CROSS_TERM_RATIO, INTEGER_SPACING_TOL};
use crate::specfun::{hyper_pfq, sum_series, SeriesSpec};

pub use identity::{appendix_b_residual, h_identity_residual};

type C = Complex64;

/// Tolerance on the imaginary part of quantities that are real for real q.
pub const IMAG_TOL: f64 = 1e-10;

/// Which side of the threshold a truncated expectation covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// E[I·1{I > y}]
    Above,
    /// E[I·1{I < y}]
    Below,
}

/// Model, starting scale x and rate q, with the root system and the y-independent series
/// coefficients cached.
#[derive(Debug, Clone)]
pub struct ExpFunctionalQuery {
    pub x: f64,
    pub q: C,
    pub params: KouParams,
    pub roots: RootSystem,
    left: OnceLock<Result<[C; 2]>>,
    right: OnceLock<Result<[C; 2]>>,
}

fn near_integer(z: C) -> f64 {
    C::new(z.re - z.re.round(), z.im).norm()
}

fn cpow(base: f64, e: C) -> C {
    (e * base.ln()).exp()
}

impl ExpFunctionalQuery {
    pub fn new(params: KouParams, x: f64, q: C) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidArgument(format!("x must be positive, got {x}")));
        }
        let roots = solve_roots(&params, q)?;
        let query = Self::from_roots(params, x, roots);
        if roots.integer_gap() < INTEGER_SPACING_TOL {
            return query.perturbed();
        }
        Ok(query)
    }

    fn from_roots(params: KouParams, x: f64, roots: RootSystem) -> Self {
        Self { x, q: roots.q, params, roots, left: OnceLock::new(), right: OnceLock::new() }
    }

    /// The same query at q + 1e-9(1+|q|), used when root differences sit on integers.
    pub fn perturbed(&self) -> Result<Self> {
        let q = self.q + 1e-9 * (1.0 + self.q.norm());
        log::warn!("integer-spaced parameters at q = {}; retrying at q = {}", self.q, q);
        let roots = solve_roots(&self.params, q)?;
        Ok(Self::from_roots(self.params, self.x, roots))
    }

    fn retry<T>(&self, f: impl Fn(&Self) -> Result<T>) -> Result<T> {
        match f(self) {
            Err(Error::IntegerSpacing { .. }) => f(&self.perturbed()?),
            r => r,
        }
    }

    pub fn is_real_rate(&self) -> bool {
        self.q.im == 0.0
    }

    fn ax(&self) -> f64 {
        self.roots.a * self.x
    }

    fn real(&self, v: C) -> Result<f64> {
        if self.is_real_rate() && v.im.abs() > IMAG_TOL * (1.0 + v.re.abs()) {
            return Err(Error::ImaginaryResidual { value: v.re, imag: v.im });
        }
        Ok(v.re)
    }

    /// (Ax)^{−a}·sin(π(ρ̂−a))/sin(π(b−a))·₃Φ₃(a, 1+a+ρ, 1+a−ρ̂; 1+a−b, 1+a+ζ₁, 1+a+ζ₂ | 1/(Ax))
    /// for (a, b) = (ζ̂₁, ζ̂₂) and (ζ̂₂, ζ̂₁). The sines are folded into the gamma factors so
    /// that zeros of one cancel poles of the other.
    fn left_coefficients(&self) -> Result<[C; 2]> {
        self.left.get_or_init(|| {
            let rs = &self.roots;
            let z = C::new(1.0 / self.ax(), 0.0);
            let one = |a: C, b: C| -> Result<C> {
                let series = sum_series(&SeriesSpec {
                    gamma_num: &[a, 1.0 + a + rs.rho],
                    poch_num: &[1.0 + a - rs.rho_hat],
                    gamma_den: &[1.0 + a + rs.zeta1, 1.0 + a + rs.zeta2],
                    poch_den: &[1.0 + a - b],
                    z,
                })?
                .value;
                Ok(cpow(self.ax(), -a) * gamma_ratio_entire(&[b - a], &[rs.rho_hat - a])? * series)
            };
            Ok([one(rs.zeta_hat1, rs.zeta_hat2)?, one(rs.zeta_hat2, rs.zeta_hat1)?])
        })
        .clone()
    }

    /// (q x^ζ + ζ M_{x,q}(ζ)) / ψ′(ζ) for ζ = ζ₁, ζ₂.
    fn right_coefficients(&self) -> Result<[C; 2]> {
        self.right.get_or_init(|| {
            let rs = &self.roots;
            let one = |z: C, at: Root| -> Result<C> {
                let m = mellin_continued(self, z)?;
                Ok((rs.q * cpow(self.x, z) + z * m) / psi_prime(rs, at))
            };
            Ok([one(rs.zeta1, Root::Zeta1)?, one(rs.zeta2, Root::Zeta2)?])
        })
        .clone()
    }

    fn right_pairs(&self) -> [(C, C); 2] {
        let rs = &self.roots;
        [(rs.zeta1, rs.zeta2), (rs.zeta2, rs.zeta1)]
    }

    fn left_pairs(&self) -> [(C, C); 2] {
        let rs = &self.roots;
        [(rs.zeta_hat1, rs.zeta_hat2), (rs.zeta_hat2, rs.zeta_hat1)]
    }
}

/// Meijer G by its series, falling back to the contour integral when the series cancels badly
/// (large arguments, i.e. small y).
fn meijer_eval(spec: &MeijerGSpec, x: f64) -> Result<C> {
    match meijer_g(spec, x) {
        Err(Error::Cancellation { .. }) | Err(Error::NonConvergence { .. }) | Err(Error::IntegerSpacing { .. }) => {
            log::debug!("Meijer G series unusable at argument {x}; using contour quadrature");
            meijer_g_contour(spec, x, None)
        }
        r => r,
    }
}

/// log 𝒢(s) with 𝒢(s) = Γ[1+ζ₁−s, 1+ζ₂−s, ρ̂+s; 1+ρ−s, ζ̂₁+s, ζ̂₂+s].
fn log_script_g(rs: &RootSystem, s: C) -> Result<C> {
    log_gamma_ratio(
        &[1.0 + rs.zeta1 - s, 1.0 + rs.zeta2 - s, rs.rho_hat + s],
        &[1.0 + rs.rho - s, rs.zeta_hat1 + s, rs.zeta_hat2 + s],
    )
}

fn log_mellin_m0(rs: &RootSystem, s: C) -> Result<C> {
    let one = C::new(1.0, 0.0);
    Ok((1.0 - s) * rs.a.ln() + log_gamma_ratio(&[s], &[])? + log_script_g(rs, s)? - log_script_g(rs, one)?)
}

/// M_{0,q}(s) = E[I_{0,q}^{s−1}] = A^{1−s} Γ(s) 𝒢(s)/𝒢(1).
pub fn mellin_m0(query: &ExpFunctionalQuery, s: C) -> Result<C> {
    Ok(log_mellin_m0(&query.roots, s)?.exp())
}

/// The strip max(0, 1 − Re ζ̂₁) < Re s < 1 on which the Mellin transform is defined by
/// its integral.
pub fn mellin_strip(query: &ExpFunctionalQuery) -> (f64, f64) {
    ((1.0 - query.roots.zeta_hat1.re).max(0.0), 1.0)
}

/// M_{x,q}(s) = E[I_{x,q}^{s−1}] through the three-term residue expansion of
/// q A^{−s} Γ[1+ζ₁−s, 1+ζ₂−s, ρ̂+s; 1−s, 1+ρ−s, ζ̂₁+s, ζ̂₂+s] G³³₄₅(1/(Ax)).
/// Warns outside the strip, where the value is the analytic continuation.
pub fn mellin_mxq(query: &ExpFunctionalQuery, s: C) -> Result<C> {
    let (lo, hi) = mellin_strip(query);
    if !(s.re > lo && s.re < hi) {
        log::warn!("Mellin transform evaluated at Re s = {} outside ({lo}, {hi}); using continuation", s.re);
    }
    let inside = s.re > lo && s.re < hi;
    query.retry(|q| match mellin_continued(q, s) {
        Err(Error::Cancellation { .. }) | Err(Error::NonConvergence { .. }) if inside => {
            log::debug!("Mellin series unusable at x = {}; integrating the G function directly", q.x);
            mellin_by_contour(q, s)
        }
        r => r,
    })
}

/// M_{x,q}(s) by quadrature of the Mellin-Barnes integral of G³³₄₅ (strip only). Slow but valid
/// for any x, including the small-x regime where the series in 1/(Ax) cannot be summed.
pub fn mellin_by_contour(query: &ExpFunctionalQuery, s: C) -> Result<C> {
    let rs = &query.roots;
    let one = C::new(1.0, 0.0);
    let spec = MeijerGSpec::new(
        3,
        3,
        vec![1.0 - s, one, C::from(-rs.rho), C::from(rs.rho_hat)],
        vec![1.0 - s, rs.zeta_hat1, rs.zeta_hat2, -rs.zeta1, -rs.zeta2],
    )?;
    let pre = rs.q
        * cpow(rs.a, -s)
        * gamma_ratio_entire(
            &[1.0 + rs.zeta1 - s, 1.0 + rs.zeta2 - s, rs.rho_hat + s],
            &[1.0 - s, 1.0 + rs.rho - s, rs.zeta_hat1 + s, rs.zeta_hat2 + s],
        )?;
    Ok(pre * meijer_g_contour(&spec, 1.0 / query.ax(), None)?)
}

/// Below this distance of s + ζ̂ᵢ from an integer the parts are evaluated around a circle.
const REMOVABLE_TOL: f64 = 1e-4;
const CIRCLE_RADIUS: f64 = 1e-2;
const CIRCLE_POINTS: usize = 16;

/// M_{x,q}(s) without the strip warning.
///
/// The parts have cancelling poles where s + ζ̂ᵢ is an integer. Near those points the sum is
/// taken as the mean over a small circle around s, which is exact for the analytic sum.
pub fn mellin_continued(query: &ExpFunctionalQuery, s: C) -> Result<C> {
    let rs = &query.roots;
    if near_integer(s + rs.zeta_hat1).min(near_integer(s + rs.zeta_hat2)) < REMOVABLE_TOL {
        let mut acc = C::new(0.0, 0.0);
        for k in 0..CIRCLE_POINTS {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / CIRCLE_POINTS as f64;
            acc += mellin_summed(query, s + CIRCLE_RADIUS * C::from_polar(1.0, theta))?;
        }
        return Ok(acc / CIRCLE_POINTS as f64);
    }
    mellin_summed(query, s)
}

fn mellin_summed(query: &ExpFunctionalQuery, s: C) -> Result<C> {
    let parts = mellin_parts(query, s)?;
    let total: C = parts.iter().sum();
    let magnitude: f64 = parts.iter().map(|p| p.norm()).sum();
    if magnitude > CROSS_TERM_RATIO * total.norm() {
        return Err(Error::Cancellation { ratio: magnitude / total.norm() });
    }
    Ok(total)
}

/// The three residue terms of M_{x,q}(s): the one from the poles of Γ(1−s+t) and the two from
/// Γ(ζ̂ᵢ+t). The 1/Γ(1−s) of the prefactor is absorbed into the first series, so integer s
/// (s = 2 for E[I]) needs no limit.
pub(crate) fn mellin_parts(query: &ExpFunctionalQuery, s: C) -> Result<[C; 3]> {
    let rs = &query.roots;
    for h in [rs.zeta_hat1, rs.zeta_hat2] {
        let d = near_integer(s + h);
        if d < INTEGER_SPACING_TOL {
            return Err(Error::IntegerSpacing { j: 0, k: 1, distance: d });
        }
    }
    let ax = query.ax();
    let pre = rs.q
        * cpow(rs.a, -s)
        * gamma_ratio_entire(&[1.0 + rs.zeta1 - s, 1.0 + rs.zeta2 - s], &[1.0 + rs.rho - s])?;
    let one = C::new(1.0, 0.0);
    let lead_series = sum_series(&SeriesSpec {
        gamma_num: &[one, 2.0 - s + rs.rho],
        poch_num: &[1.0 - s, 2.0 - s - rs.rho_hat],
        gamma_den: &[2.0 - s + rs.zeta1, 2.0 - s + rs.zeta2],
        poch_den: &[2.0 - s - rs.zeta_hat1, 2.0 - s - rs.zeta_hat2],
        z: C::new(1.0 / ax, 0.0),
    })?
    .value;
    let lead = cpow(ax, s - 1.0) * (rs.rho_hat + s - 1.0) / ((rs.zeta_hat1 + s - 1.0) * (rs.zeta_hat2 + s - 1.0))
        * lead_series;
    let [l1, l2] = query.left_coefficients()?;
    let [(a1, b1), (a2, b2)] = query.left_pairs();
    let t1 = gamma_ratio_entire(&[rs.rho_hat + s, 1.0 - s - a1], &[1.0 - s, b1 + s])? * l1;
    let t2 = gamma_ratio_entire(&[rs.rho_hat + s, 1.0 - s - a2], &[1.0 - s, b2 + s])? * l2;
    Ok([pre * lead, pre * t1, pre * t2])
}

/// E[I_{x,q}] = (qx + 1)/(q − ψ(1)).
pub fn first_moment(query: &ExpFunctionalQuery) -> Result<C> {
    let psi1 = laplace_exponent(&query.params, C::new(1.0, 0.0))?;
    Ok((query.q * query.x + 1.0) / (query.q - psi1))
}

/// Φ⁻(q) = −ζ̂₁ and Φ⁺(q) = ζ₁ for real q: the ends of the interval where ψ < q.
pub fn phi_bounds(query: &ExpFunctionalQuery) -> (f64, f64) {
    (-query.roots.zeta_hat1.re, query.roots.zeta1.re)
}

/// M_{x,q}(1+w) from M_{0,q} alone by the contour integral
/// q sin(πw) M₀(1+w) · (−½) ∫ x^{−z} / (z sin(πz) M₀(−z) sin(π(w+z))) dt, z = c + it.
pub fn mellin_contour_check(query: &ExpFunctionalQuery, w: f64, c: f64) -> Result<C> {
    if !query.is_real_rate() || query.q.re <= 0.0 {
        return Err(Error::InvalidArgument("contour representation needs real q > 0".into()));
    }
    let (phi_minus, _) = phi_bounds(query);
    let w_lo = phi_minus.max(-1.0);
    if !(w > w_lo && w < 0.0) {
        return Err(Error::ContourCondition(format!("w = {w} outside ({w_lo}, 0)")));
    }
    if !(c > 0.0 && c < -w) {
        return Err(Error::ContourCondition(format!("c = {c} outside (0, {})", -w)));
    }
    let rs = query.roots;
    let ln_x = query.x.ln();
    let integrand = |t: f64| -> Result<C> {
        let z = C::new(c, t);
        let log_part = -z * ln_x - log_mellin_m0(&rs, -z)?;
        let den = z * crate::specfun::sin_pi(z) * crate::specfun::sin_pi(w + z);
        Ok(log_part.exp() / den)
    };
    let integral = integrate_line(integrand, &LineQuad::default())?;
    let s = C::new(1.0 + w, 0.0);
    Ok(query.q * crate::specfun::sin_pi(C::new(w, 0.0)) * mellin_m0(query, s)? * (-0.5) * integral)
}

fn check_y(y: f64) -> Result<()> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {y}")));
    }
    Ok(())
}

fn left_spec(rs: &RootSystem, a: C, b: C, kind: LeftKind) -> Result<MeijerGSpec> {
    let one = C::new(1.0, 0.0);
    match kind {
        LeftKind::Cdf => MeijerGSpec::new(
            3,
            1,
            vec![C::from(-rs.rho_hat), C::from(rs.rho), one],
            vec![rs.zeta1, rs.zeta2, -a, -b],
        ),
        LeftKind::Density => MeijerGSpec::new(
            3,
            1,
            vec![C::from(1.0 - rs.rho_hat), one, C::from(1.0 + rs.rho)],
            vec![1.0 + rs.zeta1, 1.0 + rs.zeta2, 1.0 - a, 1.0 - b],
        ),
        LeftKind::Below => MeijerGSpec::new(
            4,
            1,
            vec![C::from(1.0 - rs.rho_hat), one, C::from(1.0 + rs.rho), C::from(3.0)],
            vec![C::from(2.0), 1.0 + rs.zeta1, 1.0 + rs.zeta2, 1.0 - a, 1.0 - b],
        ),
    }
}

#[derive(Clone, Copy)]
enum LeftKind {
    Cdf,
    Density,
    Below,
}

/// Σ over (ζ̂₁, ζ̂₂) of coefficient × G(1/(Ay)) for the y < x branch.
fn left_sum(query: &ExpFunctionalQuery, y: f64, kind: LeftKind) -> Result<C> {
    let rs = &query.roots;
    let coefs = query.left_coefficients()?;
    let arg = 1.0 / (rs.a * y);
    let mut total = C::new(0.0, 0.0);
    for ((a, b), l) in query.left_pairs().into_iter().zip(coefs) {
        total += l * meijer_eval(&left_spec(rs, a, b, kind)?, arg)?;
    }
    Ok(match kind {
        LeftKind::Cdf => rs.q / rs.a * total,
        LeftKind::Density => rs.q * total,
        LeftKind::Below => rs.q * y * y * total,
    })
}

#[derive(Clone, Copy)]
enum RightKind {
    Density,
    Tail,
    Above,
}

/// Σ over (ζ₁, ζ₂) of the y > x series.
fn right_sum(query: &ExpFunctionalQuery, y: f64, kind: RightKind) -> Result<C> {
    let rs = &query.roots;
    let coefs = query.right_coefficients()?;
    let z = C::new(-1.0 / (rs.a * y), 0.0);
    let mut total = C::new(0.0, 0.0);
    for ((za, zb), k) in query.right_pairs().into_iter().zip(coefs) {
        let den = [1.0 + za - zb, 1.0 + za + rs.zeta_hat1, 1.0 + za + rs.zeta_hat2];
        let term = match kind {
            RightKind::Density => {
                let f = hyper_pfq(&[1.0 + za, 1.0 + za - rs.rho, 1.0 + za + rs.rho_hat], &den, z)?;
                k * cpow(y, -1.0 - za) * f
            }
            RightKind::Tail => {
                let f = hyper_pfq(&[1.0 + za - rs.rho, 1.0 + za + rs.rho_hat, za], &den, z)?;
                k / za * cpow(y, -za) * f
            }
            RightKind::Above => {
                let f = hyper_pfq(
                    &[1.0 + za, 1.0 + za - rs.rho, 1.0 + za + rs.rho_hat, za - 1.0],
                    &[den[0], den[1], den[2], za],
                    z,
                )?;
                k / (za - 1.0) * cpow(y, 1.0 - za) * f
            }
        };
        total += term;
    }
    Ok(total)
}

/// Density of I_{x,q} at y (complex for complex q). At y = x the two one-sided limits are
/// averaged.
pub fn density_complex(query: &ExpFunctionalQuery, y: f64) -> Result<C> {
    check_y(y)?;
    query.retry(|q| {
        if y < q.x {
            left_sum(q, y, LeftKind::Density)
        } else if y > q.x {
            right_sum(q, y, RightKind::Density)
        } else {
            Ok(0.5 * (left_sum(q, y, LeftKind::Density)? + right_sum(q, y, RightKind::Density)?))
        }
    })
}

/// Density of I_{x,q} at y for real q.
pub fn density(query: &ExpFunctionalQuery, y: f64) -> Result<f64> {
    query.real(density_complex(query, y)?)
}

/// P(I_{x,q} < y); the analytic continuation in q when q is complex.
pub fn cdf_complex(query: &ExpFunctionalQuery, y: f64) -> Result<C> {
    check_y(y)?;
    query.retry(|q| {
        if y < q.x {
            left_sum(q, y, LeftKind::Cdf)
        } else {
            Ok(1.0 - right_sum(q, y, RightKind::Tail)?)
        }
    })
}

/// P(I_{x,q} < y) for real q.
pub fn cdf(query: &ExpFunctionalQuery, y: f64) -> Result<f64> {
    let v = query.real(cdf_complex(query, y)?)?;
    if (-IMAG_TOL..=1.0 + IMAG_TOL).contains(&v) {
        Ok(v.clamp(0.0, 1.0))
    } else {
        log::warn!("CDF value {v} at y = {y} outside [0, 1]");
        Ok(v)
    }
}

/// E[I·1{I > y}] or E[I·1{I < y}]; complex continuation for complex q. The side not covered by a
/// direct formula is obtained from E[I] = (qx + 1)/(q − ψ(1)).
pub fn tail_expectation_complex(query: &ExpFunctionalQuery, y: f64, side: Side) -> Result<C> {
    check_y(y)?;
    query.retry(|q| {
        let direct_left = y < q.x;
        let needs_moment = match side {
            Side::Above => true,
            Side::Below => !direct_left,
        };
        if needs_moment && q.roots.zeta1.re <= 1.0 {
            log::warn!("Re ζ₁ = {} ≤ 1: E[I] is infinite for this rate, continuing analytically", q.roots.zeta1.re);
        }
        let below = || -> Result<C> {
            if direct_left {
                left_sum(q, y, LeftKind::Below)
            } else {
                Ok(first_moment(q)? - right_sum(q, y, RightKind::Above)?)
            }
        };
        match side {
            Side::Below => below(),
            Side::Above => {
                if direct_left {
                    Ok(first_moment(q)? - below()?)
                } else {
                    right_sum(q, y, RightKind::Above)
                }
            }
        }
    })
}

/// E[I·1{I > y}] or E[I·1{I < y}] for real q.
pub fn tail_expectation(query: &ExpFunctionalQuery, y: f64, side: Side) -> Result<f64> {
    query.real(tail_expectation_complex(query, y, side)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::gamma_ratio;

    fn table1_query(q: C) -> ExpFunctionalQuery {
        let k = KouParams::new(0.034161, 0.16, 1.0, 0.3, 20.0, 10.0).unwrap();
        ExpFunctionalQuery::new(k, 1.0 / 0.0035, q).unwrap()
    }

    #[test]
    fn total_mass_and_first_moment() {
        let q = table1_query(C::new(0.05, 0.0));
        let m1 = mellin_continued(&q, C::new(1.0, 0.0)).unwrap();
        assert!((m1 - 1.0).norm() < 1e-12, "{m1}");
        let m2 = mellin_continued(&q, C::new(2.0, 0.0)).unwrap();
        let want = first_moment(&q).unwrap();
        assert!((m2 - want).norm() < 1e-10 * want.norm(), "{m2} {want}");
        assert!((mellin_m0(&q, C::new(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn expansion_matches_meijer_series() {
        let q = table1_query(C::new(0.05, 0.0));
        let rs = q.roots;
        for s in [C::new(0.7, 0.0), C::new(0.4, 0.3), C::new(1.6, -0.2)] {
            let spec = MeijerGSpec::new(
                3,
                3,
                vec![1.0 - s, C::from(1.0), C::from(-rs.rho), C::from(rs.rho_hat)],
                vec![1.0 - s, rs.zeta_hat1, rs.zeta_hat2, -rs.zeta1, -rs.zeta2],
            )
            .unwrap();
            let pre = rs.q
                * cpow(rs.a, -s)
                * gamma_ratio(
                    &[1.0 + rs.zeta1 - s, 1.0 + rs.zeta2 - s, rs.rho_hat + s],
                    &[1.0 - s, 1.0 + rs.rho - s, rs.zeta_hat1 + s, rs.zeta_hat2 + s],
                )
                .unwrap();
            let g = pre * meijer_g(&spec, 1.0 / (rs.a * q.x)).unwrap();
            let m = mellin_continued(&q, s).unwrap();
            assert!((g - m).norm() < 1e-11 * m.norm(), "{s}: {g} {m}");
        }
    }

    #[test]
    fn branches_meet_at_x() {
        let q = table1_query(C::new(0.05, 0.0));
        let x = q.x;
        let lo = cdf(&q, x * (1.0 - 1e-9)).unwrap();
        let hi = cdf(&q, x * (1.0 + 1e-9)).unwrap();
        assert!((lo - hi).abs() < 1e-8, "{lo} {hi}");
        let lo = tail_expectation(&q, x * (1.0 - 1e-9), Side::Below).unwrap();
        let hi = tail_expectation(&q, x * (1.0 + 1e-9), Side::Below).unwrap();
        assert!((lo - hi).abs() < 1e-8 * hi.abs(), "{lo} {hi}");
    }

    #[test]
    fn density_is_cdf_derivative() {
        let q = table1_query(C::new(0.05, 0.0));
        for y in [0.6 * q.x, 1.2 * q.x] {
            let h = 1e-4 * y;
            let fd = (cdf(&q, y + h).unwrap() - cdf(&q, y - h).unwrap()) / (2.0 * h);
            let f = density(&q, y).unwrap();
            assert!((fd - f).abs() < 1e-6 * f.abs(), "{y}: {fd} {f}");
        }
    }
}
