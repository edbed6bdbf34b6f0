use thiserror::Error;

/// Errors raised while building scenarios, evaluating channels or running the optimizer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("{what} at ({x:.3}, {y:.3}, {z:.3}) lies outside the room")]
    OutsideRoom { what: String, x: f64, y: f64, z: f64 },

    #[error("RIS grid {rows}x{cols} does not hold K = {k} elements")]
    ElementCountMismatch { rows: usize, cols: usize, k: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("size mismatch: expected {expected} {what}, got {actual}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("index {index} out of range for {len} {what}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("malformed genome: {0}")]
    MalformedGenome(String),

    #[error("oracle budget exceeded: {required:.3e} evaluations > {limit:.0e}")]
    BudgetExceeded { required: f64, limit: f64 },

    #[error("config parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
