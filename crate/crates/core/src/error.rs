use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid kernel token `{0}`")]
    KernelToken(String),

    #[error("Gram matrix factorization failed after jitter {jitter:e} (pivot {pivot} = {value:e})")]
    FactorizationFailed { jitter: f64, pivot: usize, value: f64 },

    #[error("circulant embedding has a negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("grid mismatch between integrand and integrator")]
    GridMismatch,

    #[error("degenerate path: {0}")]
    DegeneratePath(&'static str),

    #[error("horizon too large: θ·T = {0} exceeds the double-precision envelope")]
    HorizonTooLarge(f64),

    #[error("quadrature did not converge (last relative change {0:e})")]
    QuadratureNotConverged(f64),

    #[error("cell T={t} n={n}: {failures} of {replications} replications degenerate")]
    TooManyFailures {
        t: f64,
        n: usize,
        failures: usize,
        replications: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
