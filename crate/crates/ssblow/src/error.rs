//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Grid or solver configuration rejected at construction time.
    #[error("config error: {0}")]
    Config(String),

    /// A derivative order beyond what the closed forms provide.
    #[error("unsupported derivative order {order} (max {max})")]
    UnsupportedOrder { order: usize, max: usize },

    /// A precondition of a check was violated; distinct from a failed check.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Power-law tail fit failed (non-decaying or sign-changing tail).
    #[error("tail closure error: {0}")]
    Tail(String),

    /// Quadrature failed to converge across refinement.
    #[error("numeric accuracy error: {0}")]
    NumericAccuracy(String),

    /// NaN or infinity appeared where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Linear system singular or badly conditioned.
    #[error("solver error: {0}")]
    Solver(String),

    /// Elliptic compatibility condition violated beyond tolerance.
    #[error("compatibility violation: {0}")]
    Compatibility(String),

    /// The relaxation left the stable regime (norm blow-up).
    #[error("instability: {0}")]
    Instability(String),

    /// |mu| >= 1; the self-similar construction is no longer valid.
    #[error("construction invalid: {0}")]
    ConstructionInvalid(String),

    /// Mismatched field/grid shapes.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// I/O or (de)serialization failure.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
