//! Closed forms for the exponential functional of Brownian motion with drift (λ = 0) in terms of
//! Whittaker functions.
//!
//! With ν = 2μ/σ², η = √(8q/σ² + ν²)/2, κ = (1 − ν)/2, z_x = 2/(σ²x) and z_y = 2/(σ²y), every
//! quantity is a product of one Whittaker function at z_x and one at z_y:
//!
//! ```text
//!   y < x:  P(I < y)      = B y^{1−κ} M_{κ,η}(z_x) W_{κ−1,η}(z_y)
//!           E[I; I < y]   = B y^{2−κ} M_{κ,η}(z_x) (W_{κ−1,η} − W_{κ−2,η})(z_y)
//!   y ≥ x:  P(I > y)      = B y^{1−κ}/(η+κ−½) W_{κ,η}(z_x) M_{κ−1,η}(z_y)
//!           E[I; I > y]   = B y^{2−κ}/(η+κ−½) W_{κ,η}(z_x) (M_{κ−2,η}/(η+κ−3/2) + M_{κ−1,η})(z_y)
//! ```
//!
//! with B = q Γ(η−κ+½) x^κ / Γ(1+2η) · e^{(1/x − 1/y)/σ²}.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expfun::Side;
use crate::quad::{integrate_line, LineQuad};
use crate::specfun::{gamma, hyper_pfq, log_gamma, rgamma};

type C = Complex64;

/// |2η − n| below which the connection formula for W is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Above this |z| the connection formula for W cancels badly and the Laplace integral is used.
const CONNECTION_MAX_Z: f64 = 2.0;

/// ν, η, κ for a rate q and the Brownian parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmDerived {
    pub nu: C,
    pub eta: C,
    pub kappa: C,
}

impl GbmDerived {
    pub fn new(q: C, mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("need finite μ and σ > 0, got μ={mu} σ={sigma}")));
        }
        let s2 = sigma * sigma;
        let nu = C::new(2.0 * mu / s2, 0.0);
        let eta = (8.0 * q / s2 + nu * nu).sqrt() / 2.0;
        if eta.norm() == 0.0 {
            return Err(Error::InvalidArgument("η = 0".into()));
        }
        Ok(Self { nu, eta, kappa: (1.0 - nu) / 2.0 })
    }

    /// Distance of 2η from the nearest integer.
    pub fn degeneracy(&self) -> f64 {
        let t = 2.0 * self.eta;
        C::new(t.re - t.re.round(), t.im).norm()
    }

    /// ζ₁ = η + κ − ½, the positive root of μz + σ²z²/2 = q.
    pub fn zeta1(&self) -> C {
        self.eta + self.kappa - 0.5
    }
}

/// M_{κ,η}(z) = e^{−z/2} z^{η+½} ₁F₁(η−κ+½; 1+2η; z).
pub fn whittaker_m(kappa: C, eta: C, z: C) -> Result<C> {
    check_z(z)?;
    let f = hyper_pfq(&[eta - kappa + 0.5], &[1.0 + 2.0 * eta], z)?;
    Ok((-z / 2.0 + (eta + 0.5) * z.ln()).exp() * f)
}

/// W_{κ,η}(z) through the connection formula
/// W = Γ(−2η)/Γ(½−η−κ) M_{κ,η} + Γ(2η)/Γ(½+η−κ) M_{κ,−η}.
/// Large |z| (or integer 2η) switches to W = z^{η+½} e^{−z/2} U(η−κ+½, 1+2η, z) with U from its
/// Laplace integral, which needs Re(η−κ+½) > 0 and Re z > 0.
pub fn whittaker_w(kappa: C, eta: C, z: C) -> Result<C> {
    check_z(z)?;
    let two_eta = 2.0 * eta;
    let degenerate = C::new(two_eta.re - two_eta.re.round(), two_eta.im).norm() < DEGENERACY_TOL;
    let a = eta - kappa + 0.5;
    let integral_ok = a.re > 0.0 && z.re > 0.0;
    if integral_ok && (degenerate || z.norm() > CONNECTION_MAX_Z) {
        return whittaker_w_integral(kappa, eta, z);
    }
    if degenerate {
        return Err(Error::IntegerSpacing { j: 0, k: 1, distance: two_eta.re - two_eta.re.round() });
    }
    let plus = gamma(-two_eta)? * rgamma(0.5 - eta - kappa) * whittaker_m(kappa, eta, z)?;
    let minus = gamma(two_eta)? * rgamma(0.5 + eta - kappa) * whittaker_m(kappa, -eta, z)?;
    Ok(plus + minus)
}

/// U(a, b, z) Γ(a) = ∫₀^∞ e^{−zt} t^{a−1} (1+t)^{b−a−1} dt, integrated over v = ln t where the
/// integrand is analytic in a strip and decays on both sides.
fn whittaker_w_integral(kappa: C, eta: C, z: C) -> Result<C> {
    let a = eta - kappa + 0.5;
    let b = 1.0 + 2.0 * eta;
    let integrand = |v: f64| -> Result<C> {
        let log1p_ev = if v > 0.0 { v + (-v).exp().ln_1p() } else { v.exp().ln_1p() };
        Ok((-z * v.exp() + a * v + (b - a - 1.0) * log1p_ev).exp())
    };
    let integral = integrate_line(integrand, &LineQuad::default())?;
    let log_pre = (eta + 0.5) * z.ln() - z / 2.0 - log_gamma(a)?;
    Ok(log_pre.exp() * integral)
}

fn check_z(z: C) -> Result<()> {
    if z.norm() == 0.0 || !(z.re.is_finite() && z.im.is_finite()) || (z.im == 0.0 && z.re < 0.0) {
        return Err(Error::InvalidArgument(format!("Whittaker argument must satisfy |arg z| < π, got {z}")));
    }
    Ok(())
}

/// The GBM functional's ingredients for one (x, q, μ, σ).
struct Setup {
    d: GbmDerived,
    x: f64,
    q: C,
    sigma: f64,
}

impl Setup {
    fn new(x: f64, q: C, mu: f64, sigma: f64) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidArgument(format!("x must be positive, got {x}")));
        }
        if q.re <= 0.0 {
            return Err(Error::InvalidArgument(format!("need Re q > 0, got {q}")));
        }
        let mut q = q;
        let mut d = GbmDerived::new(q, mu, sigma)?;
        if d.degeneracy() < DEGENERACY_TOL {
            log::warn!("2η is within {DEGENERACY_TOL} of an integer at q = {q}; perturbing q");
            q += 1e-9 * (1.0 + q.norm());
            d = GbmDerived::new(q, mu, sigma)?;
        }
        Ok(Self { d, x, q, sigma })
    }

    fn z(&self, v: f64) -> C {
        C::new(2.0 / (self.sigma * self.sigma * v), 0.0)
    }

    /// q Γ(η−κ+½) x^κ / Γ(1+2η) · e^{(1/x − 1/y)/σ²} · y^{power−κ}.
    fn base(&self, y: f64, power: f64) -> Result<C> {
        let GbmDerived { eta, kappa, .. } = self.d;
        let log = log_gamma(eta - kappa + 0.5)? - log_gamma(1.0 + 2.0 * eta)?
            + kappa * self.x.ln()
            + (1.0 / self.x - 1.0 / y) / (self.sigma * self.sigma)
            + (power - kappa) * y.ln();
        Ok(self.q * log.exp())
    }

    /// (qx + 1)/(q − μ − σ²/2) = E[I], continued analytically past Re q ≤ ψ(1).
    fn first_moment(&self, mu: f64) -> C {
        let psi1 = mu + 0.5 * self.sigma * self.sigma;
        (self.q * self.x + 1.0) / (self.q - psi1)
    }
}

fn check_y(y: f64) -> Result<()> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {y}")));
    }
    Ok(())
}

/// P(I_{x,q} < y) for λ = 0 (the Laplace-transform analogue for complex q).
pub fn gbm_cdf(x: f64, q: C, mu: f64, sigma: f64, y: f64) -> Result<C> {
    check_y(y)?;
    let st = Setup::new(x, q, mu, sigma)?;
    let GbmDerived { eta, kappa, .. } = st.d;
    if y < x {
        let m = whittaker_m(kappa, eta, st.z(x))?;
        let w = whittaker_w(kappa - 1.0, eta, st.z(y))?;
        Ok(st.base(y, 1.0)? * m * w)
    } else {
        let w = whittaker_w(kappa, eta, st.z(x))?;
        let m = whittaker_m(kappa - 1.0, eta, st.z(y))?;
        Ok(1.0 - st.base(y, 1.0)? / st.d.zeta1() * w * m)
    }
}

/// E[I_{x,q} 1{I above / below y}] for λ = 0. The side not covered by the closed form on the
/// relevant branch is the complement within E[I].
pub fn gbm_tail_expectation(x: f64, q: C, mu: f64, sigma: f64, y: f64, side: Side) -> Result<C> {
    check_y(y)?;
    let st = Setup::new(x, q, mu, sigma)?;
    let GbmDerived { eta, kappa, .. } = st.d;
    let (below_branch, value) = if y < x {
        let m = whittaker_m(kappa, eta, st.z(x))?;
        let zy = st.z(y);
        let w = whittaker_w(kappa - 1.0, eta, zy)? - whittaker_w(kappa - 2.0, eta, zy)?;
        (true, st.base(y, 2.0)? * m * w)
    } else {
        let w = whittaker_w(kappa, eta, st.z(x))?;
        let zy = st.z(y);
        let zeta1 = st.d.zeta1();
        let m = whittaker_m(kappa - 2.0, eta, zy)? / (zeta1 - 1.0) + whittaker_m(kappa - 1.0, eta, zy)?;
        (false, st.base(y, 2.0)? / zeta1 * w * m)
    };
    let wanted_below = side == Side::Below;
    if below_branch == wanted_below {
        return Ok(value);
    }
    if st.d.zeta1().re <= 1.0 {
        log::warn!("E[I] is infinite at q = {}; using its analytic continuation", st.q);
    }
    Ok(st.first_moment(mu) - value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_reductions() {
        let m = whittaker_m(C::new(0.0, 0.0), C::new(0.5, 0.0), C::new(1.0, 0.0)).unwrap();
        assert!((m.re - 2.0 * 0.5f64.sinh()).abs() < 1e-14);
        let w = whittaker_w(C::new(0.0, 0.0), C::new(0.5, 0.0), C::new(2.0, 0.0)).unwrap();
        assert!((w.re - (-1.0f64).exp()).abs() < 1e-13, "{w}");
    }

    #[test]
    fn zeta1_solves_quadratic() {
        let (mu, sigma, q) = (0.034161, 0.16, C::new(0.05, 0.2));
        let z = GbmDerived::new(q, mu, sigma).unwrap().zeta1();
        let r = mu * z + 0.5 * sigma * sigma * z * z - q;
        assert!(r.norm() < 1e-14);
        assert!(z.re > 0.0);
    }
}
