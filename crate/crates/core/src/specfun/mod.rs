//! Complex special functions: log-gamma and gamma ratios, Pochhammer symbols, generalized and
//! regularized hypergeometric series, and the Meijer G-function.

pub mod dd;
pub mod gamma;
pub mod hyper;
pub mod meijer;

pub use gamma::{
    gamma, gamma_ratio, gamma_ratio_entire, log_gamma, pochhammer, rgamma, sin_pi, GammaRatioSpec,
};
pub use hyper::{hyper_pfq, hyper_pfq_regularized, sum_series, SeriesOutcome, SeriesSpec};
pub use meijer::{meijer_g, meijer_g_contour, MeijerGSpec};
