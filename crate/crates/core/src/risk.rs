//! GMDB net-liability risk measures.
//!
//! With the account F_t = F₀ e^{X_t + rt} net of fees (X drifting at μ − r − m) and the guarantee
//! G₀ e^{rt}, the discounted net liability at death T is
//! L = (G₀ − F₀e^{X_T})⁺ − m_d F₀ ∫₀^T e^{X_s} ds. For 0 ≤ V < G₀, L > V exactly when
//! I = x e^{X_T} + ∫₀^T e^{X_s} ds < K with x = 1/m_d and K = (G₀ − V)/(m_d F₀). Writing the
//! lifetime density as Σ wᵢ e^{−sᵢ t} turns the mixture over T into a finite sum of
//! exponential-clock functionals: P(L > V) = Σ wᵢ/sᵢ · P(I_{x,sᵢ} < K).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfun::{cdf_complex, tail_expectation_complex, ExpFunctionalQuery, Side};
use crate::gbm::{gbm_cdf, gbm_tail_expectation};
use crate::kou::KouParams;
use crate::mortality::ExpSum;

type C = Complex64;

/// Largest tolerated |Im| of a node sum; conjugate nodes make the exact sum real.
pub const IMAG_TOL: f64 = 1e-8;

/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_WIDTH: f64 = 1e-7;

/// Variable-annuity contract with a GMDB rider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contract {
    #[serde(rename = "F0")]
    pub f0: f64,
    #[serde(rename = "G0")]
    pub g0: f64,
    pub r: f64,
    pub m: f64,
    pub m_d: f64,
    /// Equity parameters before the drift adjustment.
    pub equity: KouParams,
}

impl Contract {
    pub fn validate(&self) -> Result<()> {
        let ok = self.f0 > 0.0
            && self.g0 > 0.0
            && self.m_d > 0.0
            && [self.f0, self.g0, self.r, self.m, self.m_d].iter().all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidArgument(format!("contract needs F0, G0, m_d > 0, got {self:?}")));
        }
        self.equity.validate()
    }

    /// x = 1/m_d.
    pub fn x(&self) -> f64 {
        1.0 / self.m_d
    }

    /// Equity parameters with μ replaced by μ − r − m.
    pub fn adjusted(&self) -> KouParams {
        self.equity.with_mu(self.equity.mu - self.r - self.m)
    }
}

/// K = (G₀ − V)/(m_d F₀); V ≥ G₀ leaves no room for a loss above V.
pub fn strike_from_loss(contract: &Contract, v: f64) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::InvalidArgument(format!("loss level must be non-negative, got {v}")));
    }
    if v >= contract.g0 {
        return Err(Error::InvalidArgument(format!("loss level {v} is at or above G0 = {}", contract.g0)));
    }
    Ok((contract.g0 - v) / (contract.m_d * contract.f0))
}

/// One computed quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    /// The loss level V or the confidence level p the value belongs to.
    pub level: f64,
    pub value: f64,
    pub imag_residual: f64,
    pub terms_used: usize,
    /// Set when V ≥ G₀ and the value is 0 by convention.
    pub beyond_support: bool,
}

/// VaR together with its bisection certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarReport {
    pub report: RiskReport,
    /// Final bracket [lo, hi]; P(L > lo) > 1 − p ≥ P(L > hi).
    pub bracket: [f64; 2],
    pub tail_at_bracket: [f64; 2],
}

enum NodeModel {
    Kou(ExpFunctionalQuery),
    Gbm { q: C },
}

/// A contract and a lifetime exponential sum, with one exponential-functional model per node.
pub struct LiabilityModel {
    contract: Contract,
    weights: Vec<C>,
    nodes: Vec<NodeModel>,
}

impl LiabilityModel {
    pub fn new(contract: &Contract, expsum: &ExpSum) -> Result<Self> {
        contract.validate()?;
        if expsum.terms.is_empty() {
            return Err(Error::InvalidArgument("empty exponential sum".into()));
        }
        let params = contract.adjusted();
        let x = contract.x();
        let nodes = expsum
            .terms
            .par_iter()
            .enumerate()
            .map(|(index, term)| {
                let q = term.s();
                if params.lambda == 0.0 {
                    Ok(NodeModel::Gbm { q })
                } else {
                    ExpFunctionalQuery::new(params, x, q)
                        .map(NodeModel::Kou)
                        .map_err(|e| Error::Node { index, source: Box::new(e) })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let weights = expsum.terms.iter().map(|k| k.w() / k.s()).collect();
        Ok(Self { contract: *contract, weights, nodes })
    }

    pub fn contract(&self) -> &Contract {
        &self.contract
    }

    /// Σ (wᵢ/sᵢ) f(node i), evaluated in parallel and summed in node order.
    fn node_sum(&self, f: impl Fn(&NodeModel) -> Result<C> + Sync) -> Result<C> {
        let parts = self
            .nodes
            .par_iter()
            .enumerate()
            .map(|(index, node)| f(node).map_err(|e| Error::Node { index, source: Box::new(e) }))
            .collect::<Result<Vec<C>>>()?;
        Ok(parts.iter().zip(&self.weights).map(|(v, w)| w * v).sum())
    }

    fn report(&self, level: f64, sum: C, scale: f64, offset: f64) -> Result<RiskReport> {
        let imag = (scale * sum.im).abs();
        if imag > IMAG_TOL {
            return Err(Error::ImaginaryResidual { value: offset + scale * sum.re, imag });
        }
        Ok(RiskReport {
            level,
            value: offset + scale * sum.re,
            imag_residual: imag,
            terms_used: self.nodes.len(),
            beyond_support: false,
        })
    }

    /// P(L > V).
    pub fn tail_probability(&self, v: f64) -> Result<RiskReport> {
        if v >= self.contract.g0 {
            log::warn!("loss level {v} is at or above G0; tail probability is 0");
            return Ok(RiskReport { level: v, value: 0.0, imag_residual: 0.0, terms_used: 0, beyond_support: true });
        }
        let k = strike_from_loss(&self.contract, v)?;
        let eq = self.contract.adjusted();
        let x = self.contract.x();
        let sum = self.node_sum(|node| match node {
            NodeModel::Kou(query) => cdf_complex(query, k),
            NodeModel::Gbm { q } => gbm_cdf(x, *q, eq.mu, eq.sigma, k),
        })?;
        self.report(v, sum, 1.0, 0.0)
    }

    /// Smallest V with P(L > V) ≤ 1 − p, by bisection on [0, G₀).
    pub fn value_at_risk(&self, p: f64) -> Result<VarReport> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("confidence level must lie in (0, 1), got {p}")));
        }
        let target = 1.0 - p;
        let (mut lo, mut hi) = (0.0, self.contract.g0);
        let first = self.tail_probability(lo)?;
        if !(first.value > target) {
            return Err(Error::NoSignChange { lo, hi });
        }
        let (mut tail_lo, mut tail_hi) = (first.value, 0.0);
        let mut imag = first.imag_residual;
        while hi - lo >= BISECTION_WIDTH {
            let mid = 0.5 * (lo + hi);
            let t = self.tail_probability(mid)?;
            imag = imag.max(t.imag_residual);
            if t.value > target {
                lo = mid;
                tail_lo = t.value;
            } else {
                hi = mid;
                tail_hi = t.value;
            }
        }
        let report = RiskReport {
            level: p,
            value: 0.5 * (lo + hi),
            imag_residual: imag,
            terms_used: self.nodes.len(),
            beyond_support: false,
        };
        Ok(VarReport { report, bracket: [lo, hi], tail_at_bracket: [tail_lo, tail_hi] })
    }

    /// CTE_p = G₀ − m_d F₀/(1−p) · Σ wᵢ/sᵢ · E[I_{x,sᵢ} 1{I < K}] with K from `var_p`.
    pub fn cte(&self, p: f64, var_p: f64) -> Result<RiskReport> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("confidence level must lie in (0, 1), got {p}")));
        }
        let k = strike_from_loss(&self.contract, var_p)?;
        let eq = self.contract.adjusted();
        let x = self.contract.x();
        let sum = self.node_sum(|node| match node {
            NodeModel::Kou(query) => tail_expectation_complex(query, k, Side::Below),
            NodeModel::Gbm { q } => gbm_tail_expectation(x, *q, eq.mu, eq.sigma, k, Side::Below),
        })?;
        let scale = -self.contract.m_d * self.contract.f0 / (1.0 - p);
        self.report(p, sum, scale, self.contract.g0)
    }
}

/// P(L > V) for a contract and a lifetime exponential sum.
pub fn tail_probability(contract: &Contract, expsum: &ExpSum, v: f64) -> Result<RiskReport> {
    LiabilityModel::new(contract, expsum)?.tail_probability(v)
}

pub fn value_at_risk(contract: &Contract, expsum: &ExpSum, p: f64) -> Result<VarReport> {
    LiabilityModel::new(contract, expsum)?.value_at_risk(p)
}

pub fn cte(contract: &Contract, expsum: &ExpSum, p: f64, var_p: f64) -> Result<RiskReport> {
    LiabilityModel::new(contract, expsum)?.cte(p, var_p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contract() -> Contract {
        let equity = KouParams::new(0.064161, 0.16, 1.0, 0.3, 20.0, 10.0).unwrap();
        Contract { f0: 1.0, g0: 1.0, r: 0.02, m: 0.01, m_d: 0.0035, equity }
    }

    #[test]
    fn strikes() {
        let c = contract();
        assert!((strike_from_loss(&c, 0.2).unwrap() - 228.571_428_571_428_6).abs() < 1e-9);
        assert_eq!(strike_from_loss(&c, 0.0).unwrap(), c.x());
        assert!((strike_from_loss(&c, 0.6).unwrap() - 114.285_714_285_714_3).abs() < 1e-9);
        assert!(strike_from_loss(&c, 1.0).is_err());
        assert!(strike_from_loss(&c, -0.1).is_err());
    }

    #[test]
    fn drift_adjustment() {
        assert!((contract().adjusted().mu - 0.034161).abs() < 1e-15);
    }
}
