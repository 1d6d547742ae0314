//! Numerical quadrature.
//!
//! [`integrate_line`] handles integrals over the whole real line of functions that are analytic
//! in a strip around the axis and decay exponentially, which is the situation for Mellin-Barnes
//! integrands on a vertical contour. The trapezoidal rule converges geometrically in the step
//! for such integrands, so the step is halved until successive estimates agree.
//!
//! [`gauss_kronrod`] is a globally adaptive 7/15-point Gauss-Kronrod rule for real integrands on
//! finite intervals.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Settings for [`integrate_line`].
#[derive(Debug, Clone, Copy)]
pub struct LineQuad {
    /// Relative agreement between successive step halvings.
    pub rel_tol: f64,
    /// Truncate once |f| falls below this fraction of its peak.
    pub tail: f64,
    pub initial_step: f64,
    pub max_halvings: usize,
    /// Hard cap on the truncation point.
    pub max_extent: f64,
}

impl Default for LineQuad {
    fn default() -> Self {
        Self { rel_tol: 1e-14, tail: 1e-18, initial_step: 0.5, max_halvings: 16, max_extent: 5000.0 }
    }
}

/// Find T with |f(±t)| < tail · peak for the last three probes beyond T.
fn truncation<F>(f: &F, opts: &LineQuad) -> Result<(f64, f64, f64)>
where
    F: Fn(f64) -> Result<C>,
{
    let probe = opts.initial_step;
    let mut peak = f(0.0)?.norm();
    let mut ends = [0.0f64; 2];
    for (side, sign) in [1.0f64, -1.0].into_iter().enumerate() {
        let mut quiet = 0;
        let mut t = 0.0;
        while quiet < 3 {
            t += probe;
            if t > opts.max_extent {
                return Err(Error::Quadrature { estimate: f64::NAN, error: f64::INFINITY });
            }
            let v = f(sign * t)?.norm();
            peak = peak.max(v);
            if v <= opts.tail * peak {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
        ends[side] = t;
    }
    Ok((-ends[1], ends[0], peak))
}

/// ∫_{-∞}^{∞} f(t) dt for f analytic near the axis with exponential decay.
pub fn integrate_line<F>(f: F, opts: &LineQuad) -> Result<C>
where
    F: Fn(f64) -> Result<C>,
{
    let (lo, hi, _) = truncation(&f, opts)?;
    let mut h = opts.initial_step;
    let start = (lo / h).floor() * h;
    let mut cells = ((hi - start) / h).ceil() as usize;
    let mut sum = C::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for j in 0..=cells {
        let v = f(start + j as f64 * h)?;
        sum += v;
        abs_sum += v.norm();
    }
    let mut estimate = sum * h;
    for level in 0..opts.max_halvings {
        for j in 0..cells {
            let v = f(start + (j as f64 + 0.5) * h)?;
            sum += v;
            abs_sum += v.norm();
        }
        h *= 0.5;
        cells *= 2;
        let next = sum * h;
        let diff = (next - estimate).norm();
        estimate = next;
        if level >= 1 && diff <= opts.rel_tol * next.norm() + 4.0 * f64::EPSILON * abs_sum * h {
            return Ok(next);
        }
    }
    Err(Error::Quadrature { estimate: estimate.norm(), error: f64::INFINITY })
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature of a real function on [a, b].
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut evals = 15;
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if !value.is_finite() {
            return Err(Error::Quadrature { estimate: value, error });
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(QuadResult { value, error, evals });
        }
        if parts.len() >= 5000 {
            return Err(Error::Quadrature { estimate: value, error });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        evals += 30;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_on_the_line() {
        let v = integrate_line(|t| Ok(C::new((-t * t).exp(), 0.0)), &LineQuad::default()).unwrap();
        assert!((v.re - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn lorentzian_sech() {
        // ∫ sech(t) e^{i t} dt = π sech(π/2)
        let v = integrate_line(|t| Ok(C::new(0.0, t).exp() / t.cosh()), &LineQuad::default()).unwrap();
        let want = std::f64::consts::PI / (std::f64::consts::FRAC_PI_2).cosh();
        assert!((v.re - want).abs() < 1e-13 && v.im.abs() < 1e-13, "{v}");
    }

    #[test]
    fn gauss_kronrod_polynomial_and_peak() {
        let r = gauss_kronrod(|x| x * x * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((r.value - 4.0).abs() < 1e-13);
        let r = gauss_kronrod(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-12).unwrap();
        let want = 2.0 * (1.0 / 1e-2f64).atan() / 1e-2;
        assert!((r.value - want).abs() < 1e-9 * want);
    }
}
