use thiserror::Error;

/// Errors produced by array algebra, densities, samplers and the file formats.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A multi-index component is outside `1..=dim` for its mode.
    #[error("index {index} out of range 1..={dim} in mode {mode}")]
    Index { mode: usize, index: usize, dim: usize },

    /// Operand shapes are not conformable.
    #[error("shape error: {0}")]
    Shape(String),

    /// A matrix failed the pivot-ratio singularity test.
    #[error("singular matrix{}", mode.map(|m| format!(" in mode {m}")).unwrap_or_default())]
    Singular { mode: Option<usize> },

    /// An argument lies outside the domain of a function, e.g. a negative radius.
    #[error("domain error: {0}")]
    Domain(String),

    /// An invalid distribution parameter such as non-positive degrees of freedom.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The requested operation is not available for this kernel.
    #[error("unsupported: {0}")]
    Capability(String),

    /// A size guard was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Numerical procedure (quadrature, factorization) did not converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed text input; `line` is one-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    /// Attach a mode number to a singularity error.
    pub fn in_mode(self, mode: usize) -> Self {
        match self {
            Error::Singular { .. } => Error::Singular { mode: Some(mode) },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
