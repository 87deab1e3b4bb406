//! Error types shared across the crate.

pub type Result<T> = std::result::Result<T, EntcertError>;

#[derive(Debug, thiserror::Error)]
pub enum EntcertError {
    /// Malformed arguments: dimension mismatch, bad normalization, empty input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operator required to be positive semidefinite has a negative eigenvalue.
    #[error("operator is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    /// A state that must be invariant under a twirl channel is not.
    #[error("state is not invariant under the channel (relative deviation {deviation:.3e})")]
    NotInvariant { deviation: f64 },

    /// supp(rho) is not contained in supp(sigma): S(rho||sigma) diverges.
    #[error("infinite relative entropy: support of rho leaks outside support of sigma by {leak:.3e}")]
    InfiniteRelativeEntropy { leak: f64 },

    /// rho has support outside the candidate omega, so no finite robustness bound exists.
    #[error("no finite robustness bound: rho is not supported inside the candidate")]
    NoFiniteBound,

    /// The square-root-measurement construction requires the mean closest
    /// product state to be maximally mixed.
    #[error("mean closest-product state is not maximally mixed (deviation {deviation:.3e})")]
    MeanNotMaximallyMixed { deviation: f64 },

    /// An internal invariant was violated (e.g. a stabilizer projector of rank != 1).
    #[error("internal error: {0}")]
    InternalError(String),
}

impl EntcertError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        EntcertError::InvalidInput(msg.into())
    }
}
