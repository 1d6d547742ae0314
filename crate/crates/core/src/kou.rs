//! Kou double-exponential jump diffusion: Laplace exponent and the roots of ψ(z) = q.
//!
//! ψ(z) = μz + Az² + λp·z/(ρ−z) − λ(1−p)·z/(ρ̂+z), A = σ²/2. Clearing denominators turns
//! ψ(z) = q into a quartic whose roots ζ₁, ζ₂, −ζ̂₁, −ζ̂₂ interlace with the poles for real q > 0:
//! −ζ̂₂ < −ρ̂ < −ζ̂₁ < 0 < ζ₁ < ρ < ζ₂. Complex q is reached by continuation from Re q, which
//! carries those labels along.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C = Complex64;

/// Drift, volatility and double-exponential jump parameters of X.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KouParams {
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub p: f64,
    pub rho: f64,
    pub rho_hat: f64,
}

impl KouParams {
    pub fn new(mu: f64, sigma: f64, lambda: f64, p: f64, rho: f64, rho_hat: f64) -> Result<Self> {
        let k = Self { mu, sigma, lambda, p, rho, rho_hat };
        k.validate()?;
        Ok(k)
    }

    /// Pure Brownian motion with drift.
    pub fn brownian(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(mu, sigma, 0.0, 0.5, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu, self.sigma, self.lambda, self.p, self.rho, self.rho_hat];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite Kou parameter".into()));
        }
        if self.sigma <= 0.0 {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidArgument(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidArgument(format!("p must lie in (0, 1), got {}", self.p)));
        }
        if self.rho <= 0.0 || self.rho_hat <= 0.0 {
            return Err(Error::InvalidArgument("jump rates must be positive".into()));
        }
        Ok(())
    }

    /// A = σ²/2.
    pub fn a(&self) -> f64 {
        0.5 * self.sigma * self.sigma
    }

    pub fn with_mu(self, mu: f64) -> Self {
        Self { mu, ..self }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }
}

fn psi_unchecked(k: &KouParams, z: C) -> C {
    if k.lambda == 0.0 {
        return z * k.mu + z * z * k.a();
    }
    z * k.mu + z * z * k.a() + z * k.lambda * k.p / (k.rho - z) - z * k.lambda * (1.0 - k.p) / (k.rho_hat + z)
}

/// ψ(z) = log E[e^{z X_1}].
pub fn laplace_exponent(k: &KouParams, z: C) -> Result<C> {
    if k.lambda > 0.0 && (z == C::new(k.rho, 0.0) || z == C::new(-k.rho_hat, 0.0)) {
        return Err(Error::Pole { arg: z, context: "Kou Laplace exponent" });
    }
    Ok(psi_unchecked(k, z))
}

/// ψ'(z) from the definition.
pub fn laplace_exponent_derivative(k: &KouParams, z: C) -> C {
    let up = k.rho - z;
    let down = k.rho_hat + z;
    k.mu + 2.0 * k.a() * z + k.lambda * k.p * k.rho / (up * up)
        - k.lambda * (1.0 - k.p) * k.rho_hat / (down * down)
}

/// (ψ(z) − q)(ρ − z)(ρ̂ + z) and its derivative, in factored form.
fn quartic(k: &KouParams, q: C, z: C) -> (C, C) {
    let a = k.a();
    let base = z * k.mu + z * z * a - q;
    let dbase = k.mu + 2.0 * a * z;
    let up = k.rho - z;
    let down = k.rho_hat + z;
    let lp = k.lambda * k.p;
    let lq = k.lambda * (1.0 - k.p);
    let val = base * up * down + z * down * lp - z * up * lq;
    let der = dbase * up * down + base * (up - down) + (down + z) * lp - (up - z) * lq;
    (val, der)
}

/// Roots of ψ(z) = q with their labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootSystem {
    pub q: C,
    pub a: f64,
    pub zeta1: C,
    pub zeta2: C,
    pub zeta_hat1: C,
    pub zeta_hat2: C,
    pub rho: f64,
    pub rho_hat: f64,
}

/// Which positive root ψ′ is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Root {
    Zeta1,
    Zeta2,
}

impl RootSystem {
    /// The four quartic roots in the order ζ₁, ζ₂, −ζ̂₁, −ζ̂₂.
    pub fn quartic_roots(&self) -> [C; 4] {
        [self.zeta1, self.zeta2, -self.zeta_hat1, -self.zeta_hat2]
    }

    /// |A ζ₁ζ₂ζ̂₁ζ̂₂/(ρρ̂) − q| / |q|.
    pub fn product_identity_residual(&self) -> f64 {
        let prod = self.a * self.zeta1 * self.zeta2 * self.zeta_hat1 * self.zeta_hat2 / (self.rho * self.rho_hat);
        (prod - self.q).norm() / self.q.norm()
    }

    /// −A(z−ζ₁)(z−ζ₂)(z+ζ̂₁)(z+ζ̂₂), which equals (ψ(z) − q)(ρ − z)(ρ̂ + z).
    pub fn quartic_from_roots(&self, z: C) -> C {
        -self.a * (z - self.zeta1) * (z - self.zeta2) * (z + self.zeta_hat1) * (z + self.zeta_hat2)
    }

    /// Distance of ζ₂−ζ₁ and ζ̂₂−ζ̂₁ to the nearest integer (the smaller of the two).
    pub fn integer_gap(&self) -> f64 {
        let gap = |d: C| C::new(d.re - d.re.round(), d.im).norm();
        gap(self.zeta2 - self.zeta1).min(gap(self.zeta_hat2 - self.zeta_hat1))
    }

    pub fn conj(&self) -> Self {
        Self {
            q: self.q.conj(),
            zeta1: self.zeta1.conj(),
            zeta2: self.zeta2.conj(),
            zeta_hat1: self.zeta_hat1.conj(),
            zeta_hat2: self.zeta_hat2.conj(),
            ..*self
        }
    }
}

/// ψ′ at ζ₁ or ζ₂ from the factorization
/// ψ(z) − q = A(z−ζ₁)(z−ζ₂)(z+ζ̂₁)(z+ζ̂₂)/((z−ρ)(z+ρ̂)).
pub fn psi_prime(rs: &RootSystem, at: Root) -> C {
    let (z, other) = match at {
        Root::Zeta1 => (rs.zeta1, rs.zeta2),
        Root::Zeta2 => (rs.zeta2, rs.zeta1),
    };
    rs.a * (z - other) * (z + rs.zeta_hat1) * (z + rs.zeta_hat2) / ((z - rs.rho) * (z + rs.rho_hat))
}

/// Bisection on (lo, hi) for a sign change of ψ − q, given the sign on the left end.
fn bisect(k: &KouParams, q: f64, mut lo: f64, mut hi: f64, left_negative: bool) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        let h = psi_unchecked(k, C::new(mid, 0.0)).re - q;
        if (h < 0.0) == left_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn real_roots(k: &KouParams, q: f64) -> Result<[f64; 4]> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("bisection needs real q > 0, got {q}")));
    }
    let f = |z: f64| psi_unchecked(k, C::new(z, 0.0)).re - q;
    let mut r = 2.0 * k.rho + 1.0;
    while f(r) <= 0.0 {
        r *= 2.0;
        if !r.is_finite() {
            return Err(Error::NoSignChange { lo: k.rho, hi: r });
        }
    }
    let mut l = 2.0 * k.rho_hat + 1.0;
    while f(-l) <= 0.0 {
        l *= 2.0;
        if !l.is_finite() {
            return Err(Error::NoSignChange { lo: -l, hi: -k.rho_hat });
        }
    }
    Ok([
        bisect(k, q, 0.0, k.rho, true),
        bisect(k, q, k.rho, r, true),
        bisect(k, q, -k.rho_hat, 0.0, false),
        bisect(k, q, -l, -k.rho_hat, false),
    ])
}

/// Newton on the cleared quartic from `z`.
fn newton(k: &KouParams, q: C, mut z: C) -> Option<C> {
    for _ in 0..60 {
        let (v, d) = quartic(k, q, z);
        if d == C::new(0.0, 0.0) {
            return None;
        }
        let dz = v / d;
        z -= dz;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return None;
        }
        if dz.norm() <= 4.0 * f64::EPSILON * z.norm().max(1e-300) {
            return Some(z);
        }
    }
    // Accept a limit cycle at rounding level.
    let (v, d) = quartic(k, q, z);
    if (v / d).norm() <= 1e-12 * z.norm().max(1.0) {
        Some(z)
    } else {
        None
    }
}

/// Advance the four quartic roots from q_from to q_to; None when the matching is ambiguous.
fn track_step(k: &KouParams, q_from: C, q_to: C, roots: &[C; 4]) -> Option<[C; 4]> {
    let dq = q_to - q_from;
    let mut next = [C::new(0.0, 0.0); 4];
    for (i, &z) in roots.iter().enumerate() {
        // Euler predictor dz/dq = 1/ψ'(z) in quartic form: P(z; q) = 0, ∂P/∂q = −(ρ−z)(ρ̂+z).
        let (_, d) = quartic(k, q_from, z);
        let dp_dq = -(k.rho - z) * (k.rho_hat + z);
        let guess = if d == C::new(0.0, 0.0) { z } else { z - dp_dq * dq / d };
        next[i] = newton(k, q_to, guess)?;
    }
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..4 {
        for j in i + 1..4 {
            if (next[i] - next[j]).norm() <= 1e-10 * scale {
                return None;
            }
        }
        // Each new root must be closest to its own predecessor.
        let own = (next[i] - roots[i]).norm();
        for j in 0..4 {
            if j != i && (next[i] - roots[j]).norm() < own {
                return None;
            }
        }
    }
    Some(next)
}

fn track(k: &KouParams, q_from: C, q_to: C, roots: [C; 4], depth: u32) -> Result<[C; 4]> {
    if let Some(r) = track_step(k, q_from, q_to, &roots) {
        return Ok(r);
    }
    if depth >= 12 {
        return Err(Error::RootTracking { t: q_from.norm() });
    }
    let mid = 0.5 * (q_from + q_to);
    let half = track(k, q_from, mid, roots, depth + 1)?;
    track(k, mid, q_to, half, depth + 1)
}

/// Number of homotopy steps from Re q to q.
pub const HOMOTOPY_STEPS: usize = 64;

/// Roots of ψ(z) = q, labelled by interlacing at real q and by continuation from Re q otherwise.
pub fn solve_roots(k: &KouParams, q: C) -> Result<RootSystem> {
    k.validate()?;
    if k.lambda == 0.0 {
        return Err(Error::InvalidArgument("lambda = 0 has only two roots; use the gbm module".into()));
    }
    if !(q.re.is_finite() && q.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite rate {q}")));
    }
    let mut q0 = q.re;
    if q0 <= 0.0 {
        log::warn!("Re(q) = {} is not positive; starting root continuation from 1e-8", q.re);
        q0 = 1e-8;
    }
    let r = real_roots(k, q0)?;
    let mut roots = [C::new(r[0], 0.0), C::new(r[1], 0.0), C::new(r[2], 0.0), C::new(r[3], 0.0)];
    let start = C::new(q0, 0.0);
    if q != start {
        for step in 0..HOMOTOPY_STEPS {
            let t0 = step as f64 / HOMOTOPY_STEPS as f64;
            let t1 = (step + 1) as f64 / HOMOTOPY_STEPS as f64;
            let qa = start + (q - start) * t0;
            let qb = start + (q - start) * t1;
            roots = track(k, qa, qb, roots, 0)?;
        }
    }
    let rs = RootSystem {
        q,
        a: k.a(),
        zeta1: roots[0],
        zeta2: roots[1],
        zeta_hat1: -roots[2],
        zeta_hat2: -roots[3],
        rho: k.rho,
        rho_hat: k.rho_hat,
    };
    let gap = rs.integer_gap();
    if gap < crate::specfun::meijer::INTEGER_SPACING_TOL {
        log::warn!("root differences are within {gap:e} of an integer; series evaluation may need a perturbed rate");
    }
    Ok(rs)
}

/// Kou parameters with the first two moments of X₁ equal to those of a Brownian motion with
/// drift μ₁ and volatility σ₁.
pub fn moment_match(mu1: f64, sigma1: f64, lambda: f64, p: f64, rho: f64, rho_hat: f64) -> Result<KouParams> {
    let var = sigma1 * sigma1 - 2.0 * lambda * p / (rho * rho) - 2.0 * lambda * (1.0 - p) / (rho_hat * rho_hat);
    if var <= 0.0 {
        return Err(Error::NegativeVariance(var));
    }
    let mu2 = mu1 - lambda * p / rho + lambda * (1.0 - p) / rho_hat;
    KouParams::new(mu2, var.sqrt(), lambda, p, rho, rho_hat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> KouParams {
        KouParams::new(0.034161, 0.16, 1.0, 0.3, 20.0, 10.0).unwrap()
    }

    #[test]
    fn psi_basics() {
        let k = table1();
        assert_eq!(laplace_exponent(&k, C::new(0.0, 0.0)).unwrap(), C::new(0.0, 0.0));
        let b = KouParams::brownian(0.1, 0.2).unwrap();
        let v = laplace_exponent(&b, C::new(1.0, 0.0)).unwrap();
        assert!((v.re - 0.12).abs() < 1e-15);
        assert!(laplace_exponent(&k, C::new(20.0, 0.0)).is_err());
    }

    #[test]
    fn psi_at_one_exact_rational() {
        // 0.034161 + 0.0128 + 0.3/19 - 0.7/11 evaluated in exact rationals
        let v = laplace_exponent(&table1(), C::new(1.0, 0.0)).unwrap();
        assert!((v.re + 0.000_885_889_952_153_110_1).abs() < 1e-17);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn real_roots_interlace() {
        let k = table1();
        let rs = solve_roots(&k, C::new(0.05, 0.0)).unwrap();
        assert!(-rs.zeta_hat2.re < -k.rho_hat && -k.rho_hat < -rs.zeta_hat1.re);
        assert!(-rs.zeta_hat1.re < 0.0 && 0.0 < rs.zeta1.re && rs.zeta1.re < k.rho && k.rho < rs.zeta2.re);
        assert!(rs.product_identity_residual() < 1e-12);
        for z in rs.quartic_roots() {
            let r = (laplace_exponent(&k, z).unwrap() - 0.05).norm();
            assert!(r < 1e-12 * 1.05, "{z}: {r}");
        }
    }

    #[test]
    fn complex_rate_conjugates() {
        let k = table1();
        let q = C::new(0.07, 0.9);
        let a = solve_roots(&k, q).unwrap();
        let b = solve_roots(&k, q.conj()).unwrap();
        assert_eq!(a.conj(), b);
        for z in a.quartic_roots() {
            assert!((laplace_exponent(&k, z).unwrap() - q).norm() < 1e-12 * (1.0 + q.norm()));
        }
    }

    #[test]
    fn psi_prime_matches_definition() {
        let k = table1();
        let rs = solve_roots(&k, C::new(0.3, -0.4)).unwrap();
        for (at, z) in [(Root::Zeta1, rs.zeta1), (Root::Zeta2, rs.zeta2)] {
            let f = psi_prime(&rs, at);
            let d = laplace_exponent_derivative(&k, z);
            assert!((f - d).norm() < 1e-10 * d.norm());
        }
    }

    #[test]
    fn moment_matched_sets() {
        let a = moment_match(0.064161, 0.16, 1.0, 0.3, 20.0, 10.0).unwrap();
        assert!((a.mu - 0.119161).abs() < 5e-7 && (a.sigma - 0.100499).abs() < 5e-7);
        let b = moment_match(0.064161, 0.16, 0.00005, 0.3, 0.1, 0.2).unwrap();
        assert!((b.mu - 0.064186).abs() < 5e-7 && (b.sigma - 0.144395).abs() < 5e-7);
        let id = moment_match(0.05, 0.2, 0.0, 0.3, 1.0, 1.0).unwrap();
        assert_eq!((id.mu, id.sigma), (0.05, 0.2));
        assert!(matches!(moment_match(0.05, 0.01, 1.0, 0.3, 1.0, 1.0), Err(Error::NegativeVariance(_))));
    }
}
