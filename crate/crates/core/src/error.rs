//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid data: {0}")]
    DataValidation(String),

    #[error("non-finite log-likelihood at observation {obs}, draw {draw}")]
    NonFiniteLogLik { obs: usize, draw: usize },

    #[error("non-finite value of statistic '{label}' at draw {draw}")]
    NonFiniteStatistic { label: String, draw: usize },

    #[error("samples and log-likelihood matrix come from different runs: {0}")]
    ProvenanceMismatch(String),

    #[error("sampler initialization failed: {0}")]
    Initialization(String),

    /// The posterior covariance could not be factorized. This happens when
    /// parameters are unidentifiable or extremely correlated.
    #[error("posterior covariance is singular or not positive definite: {0}")]
    SingularCovariance(String),

    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),

    #[error("unsupported dimension {dim}: the quadrature oracle covers K <= 2 only")]
    UnsupportedDimension { dim: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("replicate exclusion cap exceeded: {excluded} of {total} replicates failed")]
    ExclusionCap { excluded: usize, total: usize },

    #[error("at iteration step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Wraps an error with the quasi-prior iteration step it occurred in.
    pub fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }
}
