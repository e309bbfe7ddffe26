use thiserror::Error;

/// Errors raised by the library. Hypothesis failures and non-convergence are
/// reported through report structs, not through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite evaluation of the nonlinearity at node {node} (t = {t}): {value}")]
    Evaluation { node: usize, t: f64, value: f64 },

    #[error("density is not in the image of L: defect {defect:e} exceeds tolerance {tolerance:e}")]
    NotInImage { defect: f64, tolerance: f64 },

    #[error("fixed-point iteration diverged at iteration {iteration} (norm {norm:e})")]
    Divergence { iteration: usize, norm: f64 },

    #[error("degenerate endpoint: h({at}) = {value:e} is numerically zero")]
    DegenerateEndpoint { at: f64, value: f64 },

    #[error("no Nagumo bound found below {ceiling:e}")]
    NoBoundFound { ceiling: f64 },

    #[error("shooting oracle found no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("shooting map is identically zero on [{lo}, {hi}]: every kernel element solves the problem")]
    DegenerateBracket { lo: f64, hi: f64 },

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("I/O: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
