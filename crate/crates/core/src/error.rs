use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gamma function pole at {arg} ({context})")]
    Pole { arg: Complex64, context: &'static str },

    #[error("series did not converge after {terms} terms")]
    NonConvergence { terms: usize },

    #[error("catastrophic cancellation: term/sum ratio {ratio:e}")]
    Cancellation { ratio: f64 },

    #[error("parameters b[{j}] and b[{k}] differ by an integer (distance {distance:e})")]
    IntegerSpacing { j: usize, k: usize, distance: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contour conditions violated: {0}")]
    ContourCondition(String),

    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("root tracking failed at homotopy parameter {t}")]
    RootTracking { t: f64 },

    #[error("imaginary residual {imag:e} exceeds tolerance for value {value:e}")]
    ImaginaryResidual { value: f64, imag: f64 },

    #[error("negative implied diffusion variance {0:e}")]
    NegativeVariance(f64),

    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("rank deficient Hankel matrix: {0}")]
    RankDeficient(String),

    #[error("exponential-sum fit error {sup_error:e} exceeds tolerance {tol:e}")]
    FitTolerance { sup_error: f64, tol: f64 },

    #[error("exponential-sum node {index} failed: {source}")]
    Node {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
