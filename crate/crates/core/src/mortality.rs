//! Gompertz-Makeham lifetimes and their approximation by complex exponential sums.
//!
//! The remaining-lifetime density f(t) = (A + B c^{x+t}) exp(−At − B c^x (c^t − 1)/ln c) is fitted
//! as Σ wᵢ e^{−sᵢ t} with Re sᵢ > 0, so that its Laplace transform is a finite sum of poles. The
//! fit is ESPRIT on uniform samples: the dominant left singular subspace of the Hankel matrix of
//! samples is shift-invariant, the eigenvalues of the shift give the nodes zᵢ = e^{−sᵢ Δt}, and
//! the weights solve the Vandermonde system in least squares.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C = Complex64;

/// Singular values below this fraction of the largest count as numerically zero.
const RANK_TOL: f64 = 1e-13;

/// Hazard A + B c^{age+t}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GompertzMakeham {
    pub age: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub c: f64,
}

impl GompertzMakeham {
    pub fn new(age: f64, a: f64, b: f64, c: f64) -> Result<Self> {
        let gm = Self { age, a, b, c };
        gm.validate()?;
        Ok(gm)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.age.is_finite() && self.a >= 0.0 && self.b > 0.0 && self.c > 1.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Gompertz-Makeham needs A >= 0, B > 0, c > 1, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn hazard(&self, t: f64) -> f64 {
        self.a + self.b * self.c.powf(self.age + t)
    }

    /// exp(−At − B c^x (c^t − 1)/ln c).
    pub fn survival(&self, t: f64) -> f64 {
        let lc = self.c.ln();
        (-self.a * t - self.b * self.c.powf(self.age) * (t * lc).exp_m1() / lc).exp()
    }

    pub fn density(&self, t: f64) -> f64 {
        self.hazard(t) * self.survival(t)
    }

    /// Smallest whole number of years h with S(h) < tail.
    pub fn horizon(&self, tail: f64) -> f64 {
        let mut h = 1.0;
        while self.survival(h) >= tail {
            h += 1.0;
        }
        h
    }
}

/// One term w e^{−s t}; stored as real and imaginary parts for a flat JSON layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpTerm {
    pub s_re: f64,
    pub s_im: f64,
    pub w_re: f64,
    pub w_im: f64,
}

impl ExpTerm {
    pub fn new(s: C, w: C) -> Self {
        Self { s_re: s.re, s_im: s.im, w_re: w.re, w_im: w.im }
    }

    pub fn s(&self) -> C {
        C::new(self.s_re, self.s_im)
    }

    pub fn w(&self) -> C {
        C::new(self.w_re, self.w_im)
    }
}

/// f(t) ≈ Σ wᵢ e^{−sᵢ t} on [0, horizon]; `sup_error` is measured on the fitting grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpSum {
    pub terms: Vec<ExpTerm>,
    pub horizon: f64,
    pub sup_error: f64,
}

impl ExpSum {
    pub fn eval(&self, t: f64) -> C {
        self.terms.iter().map(|k| k.w() * (-k.s() * t).exp()).sum()
    }

    /// The Laplace transform Σ wᵢ/(sᵢ + u).
    pub fn laplace(&self, u: C) -> C {
        self.terms.iter().map(|k| k.w() / (k.s() + u)).sum()
    }

    /// Fail when the recorded fit error exceeds `tol`.
    pub fn require(self, tol: f64) -> Result<Self> {
        if !(self.sup_error < tol) {
            return Err(Error::FitTolerance { sup_error: self.sup_error, tol });
        }
        Ok(self)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sum: Self = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        if let Some(k) = sum.terms.iter().find(|k| !(k.s_re > 0.0)) {
            return Err(Error::InvalidArgument(format!("node with Re s <= 0: {k:?}")));
        }
        Ok(sum)
    }
}

/// Fit `m` exponentials to `f` sampled at `samples` uniform points of [0, horizon].
pub fn fit_samples(f: impl Fn(f64) -> f64, m: usize, horizon: f64, samples: usize) -> Result<ExpSum> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    let rows = samples / 2;
    if m == 0 || samples < 4 || m >= rows {
        return Err(Error::RankDeficient(format!("{m} terms from {samples} samples")));
    }
    let dt = horizon / (samples - 1) as f64;
    let y: Vec<f64> = (0..samples).map(|i| f(i as f64 * dt)).collect();

    let hankel = DMatrix::from_fn(rows, samples - rows, |i, j| y[i + j]);
    let svd = hankel.clone().svd(true, true);
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    if sv[order[m - 1]] <= RANK_TOL * sv[order[0]] {
        return Err(Error::RankDeficient(format!(
            "singular value {m} is {:e} of the largest",
            sv[order[m - 1]] / sv[order[0]]
        )));
    }
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    // Each kept triplet must satisfy Hᵀu = σv; the SVD is not trusted blindly.
    for &j in &order[..m] {
        let resid = (hankel.tr_mul(&u.column(j)) - v_t.row(j).transpose() * sv[j]).norm();
        if resid > 1e-10 * sv[order[0]] {
            return Err(Error::RankDeficient(format!("inaccurate singular triplet {j} (residual {resid:e})")));
        }
    }
    let us = DMatrix::from_fn(rows, m, |i, j| u[(i, order[j])]);
    let upper = us.rows(0, rows - 1).into_owned();
    let lower = us.rows(1, rows - 1).into_owned();
    let shift = least_squares(upper, &lower)?;

    let mut nodes: Vec<C> = shift.complex_eigenvalues().iter().copied().filter(|z| z.norm() < 1.0).collect();
    if nodes.len() < m {
        log::warn!("{} of {m} fitted modes are not decaying and were dropped", m - nodes.len());
    }
    if nodes.is_empty() {
        return Err(Error::RankDeficient("no decaying modes".into()));
    }
    // Real modes exactly real, complex ones in exact conjugate pairs.
    pair_conjugates(&mut nodes);

    let vander = DMatrix::from_fn(samples, nodes.len(), |i, j| nodes[j].powi(i as i32));
    let rhs = DMatrix::from_fn(samples, 1, |i, _| C::new(y[i], 0.0));
    let w = least_squares(vander, &rhs)?;
    let mut weights: Vec<C> = w.iter().copied().collect();
    pair_weights(&nodes, &mut weights);

    let terms: Vec<ExpTerm> = nodes
        .iter()
        .zip(&weights)
        .map(|(&z, &w)| ExpTerm::new(-z.ln() / dt, w))
        .collect();
    let mut sum = ExpSum { terms, horizon, sup_error: 0.0 };
    sum.sup_error = (0..samples).map(|i| (sum.eval(i as f64 * dt).re - y[i]).abs()).fold(0.0, f64::max);
    Ok(sum)
}

/// argmin ‖A X − B‖ by Householder QR; A must have full column rank.
fn least_squares<T: nalgebra::ComplexField<RealField = f64>>(a: DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    let qr = a.qr();
    let r = qr.r();
    let scale = (0..r.ncols()).map(|i| r[(i, i)].clone().modulus()).fold(0.0, f64::max);
    if (0..r.ncols()).any(|i| r[(i, i)].clone().modulus() <= RANK_TOL * scale) {
        return Err(Error::RankDeficient("least-squares system is rank deficient".into()));
    }
    r.solve_upper_triangular(&(qr.q().adjoint() * b))
        .ok_or_else(|| Error::RankDeficient("singular triangular factor".into()))
}

/// Fit the Gompertz-Makeham density on [0, horizon].
pub fn fit_exponential_sum(gm: &GompertzMakeham, m: usize, horizon: f64, samples: usize) -> Result<ExpSum> {
    gm.validate()?;
    fit_samples(|t| gm.density(t), m, horizon, samples)
}

/// Index of the node closest to the conjugate of `nodes[i]`, excluding i itself.
fn partner(nodes: &[C], i: usize) -> usize {
    let target = nodes[i].conj();
    (0..nodes.len())
        .filter(|&j| j != i)
        .min_by(|&a, &b| (nodes[a] - target).norm().total_cmp(&(nodes[b] - target).norm()))
        .unwrap_or(i)
}

/// Eigenvalues of a real matrix come in conjugate pairs up to rounding; make the pairing exact.
fn pair_conjugates(nodes: &mut [C]) {
    nodes.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for i in 0..nodes.len() {
        if nodes[i].im.abs() <= 1e-14 * nodes[i].norm() {
            nodes[i].im = 0.0;
        } else if nodes[i].im > 0.0 {
            let j = partner(nodes, i);
            let avg = 0.5 * (nodes[i] + nodes[j].conj());
            nodes[i] = avg;
            nodes[j] = avg.conj();
        }
    }
}

fn pair_weights(nodes: &[C], weights: &mut [C]) {
    for i in 0..nodes.len() {
        if nodes[i].im == 0.0 {
            weights[i].im = 0.0;
        } else if nodes[i].im > 0.0 {
            let j = partner(nodes, i);
            let avg = 0.5 * (weights[i] + weights[j].conj());
            weights[i] = avg;
            weights[j] = avg.conj();
        }
    }
}
