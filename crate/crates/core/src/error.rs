use thiserror::Error;

/// Errors raised by the measurement-statistics library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A physical parameter is outside its allowed range (e.g. kappa_k > 2 Delta_k).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("all postselection weights are zero")]
    EmptyPostselection,

    #[error("postselection probability {0:e} is below the conditioning threshold")]
    PostselectionImpossible(f64),

    #[error("cannot condition on k = {k}: P_0(k) = {p0:e} is below threshold")]
    ConditioningOnNull { k: f64, p0: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("quadrature did not converge: estimated error {achieved:e} exceeds tolerance {tol:e}")]
    Quadrature { achieved: f64, tol: f64 },

    #[error("drifted support leaves the grid: {0}")]
    OffGrid(String),

    /// Near-orthogonal pre- and postselection; first-order formulas do not apply.
    #[error("near-orthogonal pre/postselection (alpha_00 = {alpha00:e}, threshold {threshold:e})")]
    Nopps { alpha00: f64, threshold: f64 },

    /// Signals a bug rather than bad input.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
