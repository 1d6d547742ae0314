//! Named parameter sets for the GMDB study: equity models, contract terms and mortality.

use crate::error::{Error, Result};
use crate::kou::KouParams;
use crate::mortality::{fit_exponential_sum, ExpSum, GompertzMakeham};
use crate::risk::Contract;

/// Exponential-sum fit settings used for the published tables.
pub const FIT_TERMS: usize = 15;
pub const FIT_HORIZON: f64 = 100.0;
pub const FIT_SAMPLES: usize = 2048;

/// Loss levels and jump intensities of the tail-probability table; λ = 0 is the Brownian column.
pub const TABLE1_LEVELS: [f64; 3] = [0.2, 0.4, 0.6];
pub const TABLE1_LAMBDAS: [f64; 5] = [1.0, 0.01, 1e-4, 1e-6, 0.0];
/// Confidence levels of the risk-measure table.
pub const TABLE3_LEVELS: [f64; 4] = [0.85, 0.9, 0.95, 0.9999];

pub const EQUITY_NAMES: [&str; 4] = ["gbm", "kou-table1", "set-A", "set-B"];

pub fn gbm() -> KouParams {
    KouParams { mu: 0.064161, sigma: 0.16, lambda: 0.0, p: 0.3, rho: 20.0, rho_hat: 10.0 }
}

pub fn kou_table1() -> KouParams {
    KouParams { lambda: 1.0, ..gbm() }
}

/// Frequent small jumps.
pub fn set_a() -> KouParams {
    KouParams { mu: 0.119161, sigma: 0.100499, lambda: 1.0, p: 0.3, rho: 20.0, rho_hat: 10.0 }
}

/// Rare large jumps.
pub fn set_b() -> KouParams {
    KouParams { mu: 0.064186, sigma: 0.144395, lambda: 0.00005, p: 0.3, rho: 0.1, rho_hat: 0.2 }
}

pub fn equity(name: &str) -> Result<KouParams> {
    match name {
        "gbm" => Ok(gbm()),
        "kou-table1" => Ok(kou_table1()),
        "set-A" => Ok(set_a()),
        "set-B" => Ok(set_b()),
        _ => Err(Error::InvalidArgument(format!("unknown equity preset {name:?}, expected one of {EQUITY_NAMES:?}"))),
    }
}

/// F₀ = G₀ = 1, r = 2%, M&E fee 1%, rider fee 35% of it.
pub fn contract_default(equity: KouParams) -> Contract {
    Contract { f0: 1.0, g0: 1.0, r: 0.02, m: 0.01, m_d: 0.0035, equity }
}

pub fn mortality_65() -> GompertzMakeham {
    GompertzMakeham { age: 65.0, a: 0.0007, b: 0.00005, c: 10f64.powf(0.04) }
}

/// The default fit of the age-65 lifetime density.
pub fn lifetimes_65() -> Result<ExpSum> {
    fit_exponential_sum(&mortality_65(), FIT_TERMS, FIT_HORIZON, FIT_SAMPLES)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in EQUITY_NAMES {
            equity(name).unwrap().validate().unwrap();
        }
        assert!(equity("set-C").is_err());
        contract_default(set_a()).validate().unwrap();
        mortality_65().validate().unwrap();
    }

    #[test]
    fn jump_sets_match_brownian_moments() {
        // Both jump sets keep the mean and variance of X₁ of the Brownian model.
        let g = gbm();
        for k in [set_a(), set_b()] {
            let mean = k.mu + k.lambda * k.p / k.rho - k.lambda * (1.0 - k.p) / k.rho_hat;
            let var = k.sigma.powi(2) + 2.0 * k.lambda * k.p / k.rho.powi(2) + 2.0 * k.lambda * (1.0 - k.p) / k.rho_hat.powi(2);
            assert!((mean - g.mu).abs() < 1e-4, "{mean}");
            assert!((var - g.sigma.powi(2)).abs() < 1e-4, "{var}");
        }
    }
}
