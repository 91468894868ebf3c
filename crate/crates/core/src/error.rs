use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A value violates one of the physicality invariants (norm, trace, hermiticity, positivity).
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("columns are not orthonormal (max Gram deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("Kraus operators are not complete (max |sum K^dag K - I| = {deviation:.3e})")]
    Incomplete { deviation: f64 },

    #[error("insufficient capacity: {0}")]
    Capacity(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that stem from rejected input rather than a failure of the tool itself.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
