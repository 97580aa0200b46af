//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by the library.
///
/// The first three variants are contract violations (bad parameters or
/// shapes); the remaining ones indicate that a computation could not be
/// carried out to the promised accuracy or that a state failed a physical
/// validity check.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("{name} = {value} violates: {constraint}")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A polynomial degree or Fock index exceeds the configured cap.
    #[error("index {index} exceeds the configured cap {cap}")]
    IndexCap { index: usize, cap: usize },

    /// Two distributions or matrices do not have compatible shapes.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The thermal background vanishes, making the chi-square detectability
    /// coefficient singular for any non-vacuum active state.
    #[error("degenerate thermal background (nu = 0): detectability coefficient is singular")]
    DegenerateBackground,

    /// A series or coefficient does not converge for these parameters.
    #[error("divergent: {0}")]
    Divergence(String),

    /// A numerical procedure failed its own accuracy certificate.
    #[error("numerical instability: {0}")]
    Numerical(String),

    /// A covariance matrix fails the physical validity (bona fide) check.
    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by caller-supplied parameters rather than by
    /// numerical breakdown. Used by the CLI to pick exit codes.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. } | Error::IndexCap { .. } | Error::Shape(_)
        )
    }
}
