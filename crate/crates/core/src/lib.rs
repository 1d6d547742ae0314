//! Exponential functionals of Kou jump-diffusion and Brownian Lévy processes, and the GMDB
//! variable-annuity risk measures built on them.

pub mod error;
pub mod expfun;
pub mod gbm;
pub mod kou;
pub mod mc;
pub mod mortality;
pub mod presets;
pub mod quad;
pub mod risk;
pub mod specfun;

pub use error::{Error, Result};
pub use kou::{KouParams, RootSystem};
pub use mortality::{ExpSum, GompertzMakeham};
pub use risk::{Contract, RiskReport};
pub use num_complex::Complex64;
