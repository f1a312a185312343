use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// The variants group into three families that the command-line front end
/// maps onto distinct exit codes: configuration problems, numerical failures
/// and resource limits.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid lattice spec: {0}")]
    InvalidSpec(String),

    #[error("wrong builder: {0}")]
    WrongBuilder(String),

    #[error("matrix is not Hermitian: max |H_ij - conj(H_ji)| = {max_asymmetry:e} (tolerance {tolerance:e})")]
    NotHermitian { max_asymmetry: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("resource limit: many-body dimension {dimension} exceeds cap {cap}")]
    ResourceLimit { dimension: usize, cap: usize },

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("window [{start}, {end}] lies outside series range [{first}, {last}]")]
    WindowOutOfRange {
        start: f64,
        end: f64,
        first: f64,
        last: f64,
    },

    #[error("bath correlation undefined: |B psi0| = {0:e}")]
    UndefinedCorrelation(f64),

    #[error("invalid fit input: {0}")]
    InvalidFit(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("realization {index} failed: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("grid point {index} failed: {source}")]
    GridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error classes used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Resource,
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ResourceLimit { .. } => ErrorClass::Resource,
            Error::Config { .. }
            | Error::InvalidSpec(_)
            | Error::WrongBuilder(_)
            | Error::InvalidDimension(_)
            | Error::Io(_) => ErrorClass::Config,
            Error::Realization { source, .. } | Error::GridPoint { source, .. } => source.class(),
            _ => ErrorClass::Numerical,
        }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Config => 1,
            ErrorClass::Numerical => 2,
            ErrorClass::Resource => 3,
        }
    }
}
