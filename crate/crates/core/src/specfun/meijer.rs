//! Meijer G-function.
//!
//! The convention is the Mellin-Barnes integral
//!
//! ```text
//!   G^{mn}_{pq}(a; b | x) = 1/(2πi) ∫_{λ+iR} 𝒢(s) x^{-s} ds,
//!   𝒢(s) = ∏_{j≤m} Γ(b_j+s) ∏_{j≤n} Γ(1-a_j-s) / ( ∏_{j>m} Γ(1-b_j-s) ∏_{j>n} Γ(a_j+s) ),
//! ```
//!
//! with λ between the two families of poles. For p < q the integral equals the residue sum over
//! the poles of Γ(b_k+s), k ≤ m, which gives m hypergeometric series in x:
//!
//! ```text
//!   Σ_k  ∏_{j≠k, j≤m} Γ(b_j-b_k) ∏_{j≤n} Γ(1+b_k-a_j) / ( ∏_{j>m} Γ(1+b_k-b_j) ∏_{j>n} Γ(a_j-b_k) )
//!        · x^{b_k} · pF_{q-1}(1+b_k-a; 1+b_k-b_{≠k} | (-1)^{p-m-n} x).
//! ```
//!
//! [`meijer_g`] sums these with the reciprocal gammas folded into the series, so that
//! Γ(a_j-b_k) or Γ(1+b_k-b_j) at a pole gives the correct finite limit instead of 0·∞.
//! [`meijer_g_contour`] integrates the definition directly and serves as an independent check.

use num_complex::Complex64;

use super::gamma::{gamma, is_nonpositive_integer, log_gamma, rgamma};
use super::hyper::{sum_series, SeriesSpec};
use crate::error::{Error, Result};
use crate::quad::{integrate_line, LineQuad};

type C = Complex64;

/// Threshold below which two b parameters count as integer-spaced.
pub const INTEGER_SPACING_TOL: f64 = 1e-8;

/// Largest tolerated Σ|part| / |sum| when separately computed parts are added.
pub const CROSS_TERM_RATIO: f64 = 1e6;

/// Largest tolerated estimated relative rounding error of the residue series.
pub const SERIES_REL_TOL: f64 = 1e-10;

/// Absolute error of one log-gamma evaluation, as measured against 40-digit references.
const LOG_GAMMA_ERR: f64 = 4e-15;

/// Parameters of G^{mn}_{pq}(a; b | ·); p = a.len(), q = b.len().
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerGSpec {
    pub m: usize,
    pub n: usize,
    pub a: Vec<C>,
    pub b: Vec<C>,
}

impl MeijerGSpec {
    pub fn new(m: usize, n: usize, a: Vec<C>, b: Vec<C>) -> Result<Self> {
        if m > b.len() || n > a.len() {
            return Err(Error::InvalidArgument(format!(
                "Meijer G needs m <= q and n <= p, got m={m} n={n} p={} q={}",
                a.len(),
                b.len()
            )));
        }
        Ok(Self { m, n, a, b })
    }

    /// Build from real parameters.
    pub fn real(m: usize, n: usize, a: &[f64], b: &[f64]) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&x| C::new(x, 0.0)).collect();
        Self::new(m, n, c(a), c(b))
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    /// Parameters of x^c G(a; b | x) = G(a + c; b + c | x).
    pub fn shifted(&self, c: C) -> Self {
        Self {
            m: self.m,
            n: self.n,
            a: self.a.iter().map(|&v| v + c).collect(),
            b: self.b.iter().map(|&v| v + c).collect(),
        }
    }

    /// Parameters of G^{nm}_{qp}(1-b; 1-a | 1/x), which equals G^{mn}_{pq}(a; b | x).
    pub fn inverted(&self) -> Self {
        Self {
            m: self.n,
            n: self.m,
            a: self.b.iter().map(|&v| 1.0 - v).collect(),
            b: self.a.iter().map(|&v| 1.0 - v).collect(),
        }
    }

    /// Complex-conjugated parameters.
    pub fn conj(&self) -> Self {
        Self {
            m: self.m,
            n: self.n,
            a: self.a.iter().map(|v| v.conj()).collect(),
            b: self.b.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Drop parameter pairs whose gamma factors cancel in 𝒢(s): a_j (j ≤ n) equal to b_k (k > m),
    /// and b_j (j ≤ m) equal to a_k (k > n). Exact equality only.
    pub fn reduced(&self) -> Self {
        let mut spec = self.clone();
        'outer: loop {
            for j in 0..spec.n {
                for k in spec.m..spec.q() {
                    if spec.a[j] == spec.b[k] {
                        spec.a.remove(j);
                        spec.b.remove(k);
                        spec.n -= 1;
                        continue 'outer;
                    }
                }
            }
            for j in 0..spec.m {
                for k in spec.n..spec.p() {
                    if spec.b[j] == spec.a[k] {
                        spec.b.remove(j);
                        spec.a.remove(k);
                        spec.m -= 1;
                        continue 'outer;
                    }
                }
            }
            return spec;
        }
    }

    /// min Re b_j over j ≤ m (+∞ when m = 0).
    pub fn b_lower(&self) -> f64 {
        self.b[..self.m].iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    /// max Re a_j over j ≤ n (-∞ when n = 0).
    pub fn a_upper(&self) -> f64 {
        self.a[..self.n].iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest distance of b_j - b_k (j < k ≤ m) to an integer, with the offending pair.
    pub fn integer_spacing(&self) -> Option<(usize, usize, f64)> {
        let mut worst: Option<(usize, usize, f64)> = None;
        for j in 0..self.m {
            for k in j + 1..self.m {
                let d = self.b[j] - self.b[k];
                let dist = C::new(d.re - d.re.round(), d.im).norm();
                if worst.map_or(true, |w| dist < w.2) {
                    worst = Some((j, k, dist));
                }
            }
        }
        worst
    }

    /// log 𝒢(s), or None when a reciprocal gamma vanishes.
    fn log_mellin_kernel(&self, s: C) -> Result<Option<C>> {
        let mut acc = C::new(0.0, 0.0);
        for j in 0..self.m {
            acc += log_gamma(self.b[j] + s)?;
        }
        for j in 0..self.n {
            acc += log_gamma(1.0 - self.a[j] - s)?;
        }
        for j in self.m..self.q() {
            let z = 1.0 - self.b[j] - s;
            if is_nonpositive_integer(z) {
                return Ok(None);
            }
            acc -= log_gamma(z)?;
        }
        for j in self.n..self.p() {
            let z = self.a[j] + s;
            if is_nonpositive_integer(z) {
                return Ok(None);
            }
            acc -= log_gamma(z)?;
        }
        Ok(Some(acc))
    }
}

/// G^{mn}_{pq}(a; b | x) for x > 0 by the residue-series expansion. p > q is handled through the
/// inversion identity; p = q is not supported.
pub fn meijer_g(spec: &MeijerGSpec, x: f64) -> Result<C> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidArgument(format!("Meijer G argument must be positive, got {x}")));
    }
    let spec = spec.reduced();
    match spec.p().cmp(&spec.q()) {
        std::cmp::Ordering::Less => series(&spec, x),
        std::cmp::Ordering::Greater => series(&spec.inverted(), 1.0 / x),
        std::cmp::Ordering::Equal => {
            Err(Error::InvalidArgument("Meijer G with p = q is not supported".into()))
        }
    }
}

fn series(spec: &MeijerGSpec, x: f64) -> Result<C> {
    if let Some((j, k, distance)) = spec.integer_spacing() {
        if distance < INTEGER_SPACING_TOL {
            return Err(Error::IntegerSpacing { j, k, distance });
        }
    }
    let (m, n, p, q) = (spec.m, spec.n, spec.p(), spec.q());
    let sign = if (p + m + n) % 2 == 0 { 1.0 } else { -1.0 };
    let z = C::new(sign * x, 0.0);
    let ln_x = x.ln();
    let mut total = C::new(0.0, 0.0);
    let mut magnitude = 0.0;
    let mut rounding = 0.0;
    let mut gamma_num = Vec::with_capacity(n);
    let mut poch_num = Vec::with_capacity(p);
    let mut gamma_den = Vec::with_capacity(q);
    let mut poch_den = Vec::with_capacity(m);
    for k in 0..m {
        let bk = spec.b[k];
        gamma_num.clear();
        poch_num.clear();
        gamma_den.clear();
        poch_den.clear();
        let mut log_coef = bk * ln_x;
        let mut coef = C::new(1.0, 0.0);
        for j in 0..m {
            if j != k {
                log_coef += log_gamma(spec.b[j] - bk)?;
                poch_den.push(1.0 + bk - spec.b[j]);
            }
        }
        for j in 0..n {
            gamma_num.push(1.0 + bk - spec.a[j]);
        }
        for j in n..p {
            coef *= rgamma(spec.a[j] - bk);
            poch_num.push(1.0 + bk - spec.a[j]);
        }
        for j in m..q {
            gamma_den.push(1.0 + bk - spec.b[j]);
        }
        if coef == C::new(0.0, 0.0) {
            continue;
        }
        let out = sum_series(&SeriesSpec {
            gamma_num: &gamma_num,
            poch_num: &poch_num,
            gamma_den: &gamma_den,
            poch_den: &poch_den,
            z,
        })?;
        let term = coef * log_coef.exp() * out.value;
        let unit = if out.double_double { 1e-31 } else { f64::EPSILON };
        // Each of the p + q − 1 gamma factors and the exponent carry their own error into the term.
        let coef_err = (p + q - 1) as f64 * LOG_GAMMA_ERR + f64::EPSILON * log_coef.norm();
        magnitude += term.norm();
        rounding += term.norm() * (unit * out.ratio.max(1.0) + coef_err);
        total += term;
    }
    rounding += f64::EPSILON * magnitude;
    if !(rounding <= SERIES_REL_TOL * total.norm()) {
        return Err(Error::Cancellation { ratio: magnitude / total.norm() });
    }
    Ok(total)
}

/// G^{mn}_{pq}(a; b | x) by direct quadrature of the Mellin-Barnes integral on Re s = λ.
/// With `lambda = None` the contour runs through the middle of the admissible strip. When the
/// two pole families overlap (no straight separating line exists) the line is placed just left
/// of the first pole of Γ(1−a_j−s) and the residues of the Γ(b_j+s) poles to its right are added.
pub fn meijer_g_contour(spec: &MeijerGSpec, x: f64, lambda: Option<f64>) -> Result<C> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidArgument(format!("Meijer G argument must be positive, got {x}")));
    }
    let (m, n, p, q) = (spec.m, spec.n, spec.p(), spec.q());
    if p + q >= 2 * (m + n) {
        return Err(Error::ContourCondition(format!("condition B fails: p+q={} >= 2(m+n)", p + q)));
    }
    let b_low = spec.b_lower();
    let a_up = spec.a_upper();
    let (lo, hi) = (-b_low, 1.0 - a_up);
    let overlap = a_up - 1.0 >= b_low;
    let lambda = match lambda {
        Some(l) => {
            if overlap || !(l > lo && l < hi) {
                return Err(Error::ContourCondition(format!("λ={l} outside ({lo}, {hi})")));
            }
            l
        }
        None if overlap => separating_line(spec, hi),
        None => match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo + 1.0,
            (false, true) => hi - 1.0,
            (false, false) => 0.0,
        },
    };
    let ln_x = x.ln();
    let integrand = |t: f64| -> Result<C> {
        let s = C::new(lambda, t);
        Ok(match spec.log_mellin_kernel(s)? {
            Some(l) => (l - s * ln_x).exp(),
            None => C::new(0.0, 0.0),
        })
    };
    let v = integrate_line(integrand, &LineQuad::default())? / (2.0 * std::f64::consts::PI);
    if !overlap {
        return Ok(v);
    }
    Ok(v + stray_residues(spec, x, lambda)?)
}

/// A line Re s = λ in (hi − 1, hi) kept as far as possible from the poles of Γ(b_j+s).
fn separating_line(spec: &MeijerGSpec, hi: f64) -> f64 {
    let clearance = |l: f64| {
        spec.b[..spec.m]
            .iter()
            .map(|b| {
                let d = l + b.re;
                C::new(d - d.round(), b.im).norm()
            })
            .fold(f64::INFINITY, f64::min)
    };
    (1..20)
        .map(|i| hi - i as f64 / 20.0)
        .max_by(|&u, &v| clearance(u).total_cmp(&clearance(v)))
        .unwrap_or(hi - 0.5)
}

/// Σ residues of 𝒢(s) x^{-s} at the poles s = −b_j − k (j ≤ m) lying right of Re s = λ.
fn stray_residues(spec: &MeijerGSpec, x: f64, lambda: f64) -> Result<C> {
    let mut total = C::new(0.0, 0.0);
    for j in 0..spec.m {
        let bj = spec.b[j];
        let mut k = 0usize;
        let mut k_fact = 1.0;
        while -bj.re - k as f64 > lambda {
            let s = -bj - k as f64;
            let mut rest = C::new(if k % 2 == 0 { 1.0 } else { -1.0 } / k_fact, 0.0);
            for (i, &b) in spec.b.iter().enumerate() {
                if i == j {
                    continue;
                }
                rest *= if i < spec.m { gamma(b + s)? } else { rgamma(1.0 - b - s) };
            }
            for (i, &a) in spec.a.iter().enumerate() {
                rest *= if i < spec.n { gamma(1.0 - a - s)? } else { rgamma(a + s) };
            }
            total += rest * (-s * x.ln()).exp();
            k += 1;
            k_fact *= k as f64;
        }
    }
    Ok(total)
}
