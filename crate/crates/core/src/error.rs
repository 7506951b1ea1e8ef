use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("inconsistent problem `{name}`: {reason}")]
    InconsistentProblem { name: String, reason: String },

    #[error("assembly failed at quadrature point {point:?}: {reason}")]
    AssemblyFailure { point: Vec<f64>, reason: String },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("run failed for dim={dim} N={n_cells} delta={delta:e} c={c:e}")]
    RunFailed {
        dim: usize,
        n_cells: usize,
        delta: f64,
        c: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::InvalidData(msg.into())
    }
}
