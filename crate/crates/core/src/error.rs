use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("eigendecomposition did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dataset is empty")]
    EmptyData,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("degrees of freedom {df} smaller than dimension {p}")]
    DegreesOfFreedomTooSmall { df: usize, p: usize },

    #[error("initial state has zero target density")]
    BadInit,

    #[error("data contain non-finite values; likelihood undefined")]
    NonFiniteLikelihood,

    #[error("perturbation too large: eigenvalue h = {h} >= 1")]
    PerturbationTooLarge { h: f64 },

    #[error("eigengap {gap:e} at index {m} is below the threshold {threshold:e}")]
    ZeroEigengap { m: usize, gap: f64, threshold: f64 },

    #[error("sample covariance is singular (n = {n}, p = {p})")]
    SingularSample { n: usize, p: usize },

    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),

    #[error("no samples supplied")]
    EmptySamples,

    #[error("perturbation order {order} exceeds the maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("LDA requires equal class covariances")]
    CovarianceMismatch,

    #[error("invalid argument `{field}`: {message}")]
    InvalidArgument { field: String, message: String },

    #[error("config error at `{field}`: {message}")]
    ConfigParse { field: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidArgument { field: field.into(), message: message.into() }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigParse { field: field.into(), message: message.into() }
    }

    /// Stable machine-readable name used in CLI error records and FFI codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::EmptyData => "EmptyData",
            Error::NonFinite(_) => "NonFinite",
            Error::DegreesOfFreedomTooSmall { .. } => "DegreesOfFreedomTooSmall",
            Error::BadInit => "BadInit",
            Error::NonFiniteLikelihood => "NonFiniteLikelihood",
            Error::PerturbationTooLarge { .. } => "PerturbationTooLarge",
            Error::ZeroEigengap { .. } => "ZeroEigengap",
            Error::SingularSample { .. } => "SingularSample",
            Error::NonPositiveVariance(_) => "NonPositiveVariance",
            Error::EmptySamples => "EmptySamples",
            Error::OrderTooHigh { .. } => "OrderTooHigh",
            Error::CovarianceMismatch => "CovarianceMismatch",
            Error::InvalidArgument { .. } => "InvalidArgument",
            Error::ConfigParse { .. } => "ConfigParse",
            Error::Io(_) => "Io",
        }
    }

    /// Field path associated with the error, when there is one.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::InvalidArgument { field, .. } | Error::ConfigParse { field, .. } => Some(field),
            _ => None,
        }
    }

    /// Prefixes the field path, so nested validation reports `truth.diag` rather than `diag`.
    pub fn at(self, prefix: &str) -> Self {
        match self {
            Error::ConfigParse { field, message } => Error::ConfigParse {
                field: if field.is_empty() { prefix.to_string() } else { format!("{prefix}.{field}") },
                message,
            },
            Error::InvalidArgument { field, message } => Error::ConfigParse {
                field: if field.is_empty() { prefix.to_string() } else { format!("{prefix}.{field}") },
                message,
            },
            other => Error::ConfigParse { field: prefix.to_string(), message: other.to_string() },
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
