//! Monte Carlo estimates of the GMDB net-liability tail on a fixed time grid.
//!
//! Lifetimes come from acceptance-rejection under a piecewise-constant envelope. The
//! drift-adjusted equity process is simulated per step (Gaussian increment plus the sum of a
//! Poisson number of double-exponential jumps), death is settled at the end of its step, and fee
//! income is the left Riemann sum of the discounted rider fees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mortality::GompertzMakeham;
use crate::risk::Contract;

/// Envelope height relative to the largest density value found on a panel.
pub const ENVELOPE_MARGIN: f64 = 1.05;
pub const PANELS: usize = 64;
/// Lifetimes are sampled on [0, h] with S(h) below this.
pub const HORIZON_TAIL: f64 = 1e-12;
/// Points per panel used to locate the panel maximum.
const PANEL_PROBES: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub paths: usize,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_experiments")]
    pub experiments: usize,
    #[serde(default)]
    pub seed: u64,
    /// Lifetime horizon in years; the smallest whole year with S < 1e-12 when absent.
    #[serde(default)]
    pub max_age_horizon: Option<f64>,
}

fn default_step() -> f64 {
    0.01
}

fn default_experiments() -> usize {
    20
}

impl SimConfig {
    pub fn new(paths: usize, seed: u64) -> Self {
        Self { paths, step: default_step(), experiments: default_experiments(), seed, max_age_horizon: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) || self.paths == 0 || self.experiments == 0 {
            return Err(Error::InvalidArgument(format!("need step > 0, paths >= 1, experiments >= 1, got {self:?}")));
        }
        if let Some(h) = self.max_age_horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidArgument(format!("horizon must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

/// Independent stream for path `path` of experiment `experiment`.
pub fn path_rng(seed: u64, experiment: usize, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((experiment as u64) << 40) | path as u64);
    rng
}

/// Acceptance-rejection sampler for the remaining lifetime.
#[derive(Debug, Clone)]
pub struct LifetimeSampler {
    gm: GompertzMakeham,
    width: f64,
    heights: Vec<f64>,
    /// Cumulative envelope mass per panel, normalised to end at 1.
    cumulative: Vec<f64>,
}

impl LifetimeSampler {
    pub fn new(gm: &GompertzMakeham, horizon: Option<f64>) -> Result<Self> {
        gm.validate()?;
        let h = horizon.unwrap_or_else(|| gm.horizon(HORIZON_TAIL));
        let width = h / PANELS as f64;
        let heights: Vec<f64> = (0..PANELS)
            .map(|k| {
                let top = (0..PANEL_PROBES)
                    .map(|j| gm.density(width * (k as f64 + j as f64 / (PANEL_PROBES - 1) as f64)))
                    .fold(0.0, f64::max);
                ENVELOPE_MARGIN * top
            })
            .collect();
        let mut cumulative: Vec<f64> = heights
            .iter()
            .scan(0.0, |acc, &v| {
                *acc += v;
                Some(*acc)
            })
            .collect();
        let total = cumulative[PANELS - 1];
        cumulative.iter_mut().for_each(|c| *c /= total);
        Ok(Self { gm: *gm, width, heights, cumulative })
    }

    pub fn horizon(&self) -> f64 {
        self.width * PANELS as f64
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        loop {
            let u: f64 = rng.random();
            let k = self.cumulative.partition_point(|&c| c < u).min(PANELS - 1);
            let t = self.width * (k as f64 + rng.random::<f64>());
            if rng.random::<f64>() * self.heights[k] < self.gm.density(t) {
                return t;
            }
        }
    }
}

/// One lifetime draw; builds the envelope on every call, so prefer `LifetimeSampler` in loops.
pub fn sample_lifetime(gm: &GompertzMakeham, rng: &mut impl Rng) -> Result<f64> {
    Ok(LifetimeSampler::new(gm, None)?.sample(rng))
}

/// Net liability for death at `t`, settled at t⁺ = step·⌈t/step⌉.
pub fn net_liability_path(contract: &Contract, t: f64, rng: &mut impl Rng, step: f64) -> f64 {
    let eq = contract.adjusted();
    let steps = (t / step).ceil().max(1.0) as usize;
    let drift = eq.mu * step;
    let vol = eq.sigma * step.sqrt();
    let no_jump = (-eq.lambda * step).exp();
    // Discounted account e^{−rs}F_s = F₀e^{X_s}, so only X is tracked.
    let (mut x, mut fees) = (0.0f64, 0.0);
    for _ in 0..steps {
        fees += x.exp();
        x += drift + vol * rng.sample::<f64, _>(StandardNormal);
        if eq.lambda > 0.0 {
            x += jumps(rng, no_jump, eq.lambda * step, eq.p, eq.rho, eq.rho_hat);
        }
    }
    let payoff = (contract.g0 - contract.f0 * x.exp()).max(0.0);
    payoff - contract.m_d * contract.f0 * step * fees
}

/// Sum of a Poisson(mean) number of double-exponential jumps, the count by inversion.
fn jumps(rng: &mut impl Rng, no_jump: f64, mean: f64, p: f64, rho: f64, rho_hat: f64) -> f64 {
    let mut u: f64 = rng.random();
    let (mut prob, mut cdf, mut n) = (no_jump, no_jump, 0u32);
    while u > cdf {
        n += 1;
        prob *= mean / n as f64;
        cdf += prob;
        if prob == 0.0 {
            break;
        }
    }
    let mut total = 0.0;
    for _ in 0..n {
        u = rng.random();
        let e: f64 = rng.sample(Exp1);
        total += if u < p { e / rho } else { -e / rho_hat };
    }
    total
}

/// Net liabilities of all paths of one experiment, in path order.
pub fn simulate_experiment(contract: &Contract, sampler: &LifetimeSampler, config: &SimConfig, experiment: usize) -> Vec<f64> {
    (0..config.paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = path_rng(config.seed, experiment, path);
            let t = sampler.sample(&mut rng);
            net_liability_path(contract, t, &mut rng, config.step)
        })
        .collect()
}

/// Cross-experiment statistics of the estimated P(L > V).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub v: f64,
    pub mean: f64,
    /// Sample standard deviation over experiments (zero for a single experiment).
    pub std: f64,
}

pub fn estimate_tail_prob(contract: &Contract, gm: &GompertzMakeham, vs: &[f64], config: &SimConfig) -> Result<Vec<TailEstimate>> {
    config.validate()?;
    contract.validate()?;
    let sampler = LifetimeSampler::new(gm, config.max_age_horizon)?;
    let mut fractions = vec![Vec::with_capacity(config.experiments); vs.len()];
    for e in 0..config.experiments {
        let losses = simulate_experiment(contract, &sampler, config, e);
        for (f, &v) in fractions.iter_mut().zip(vs) {
            let hits = losses.iter().filter(|&&l| l > v).count();
            f.push(hits as f64 / config.paths as f64);
        }
    }
    Ok(vs
        .iter()
        .zip(&fractions)
        .map(|(&v, f)| {
            let n = f.len() as f64;
            let mean = f.iter().sum::<f64>() / n;
            let var = if f.len() > 1 { f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            TailEstimate { v, mean, std: var.sqrt() }
        })
        .collect())
}

/// One row of the Monte Carlo versus analytic comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceRow {
    #[serde(rename = "V")]
    pub v: f64,
    pub mc_mean: f64,
    pub mc_std: f64,
    pub analytic: f64,
    pub abs_diff: f64,
    pub within_3std: bool,
}

impl ConcordanceRow {
    pub fn new(estimate: &TailEstimate, analytic: f64) -> Self {
        let abs_diff = (estimate.mean - analytic).abs();
        Self {
            v: estimate.v,
            mc_mean: estimate.mean,
            mc_std: estimate.std,
            analytic,
            abs_diff,
            within_3std: abs_diff <= 3.0 * estimate.std,
        }
    }
}
