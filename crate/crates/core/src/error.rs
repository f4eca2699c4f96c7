use alloc::string::String;

/// Errors raised by the rate computations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("frequency {frequency} Hz lies outside the symbol-rate band [-{band_edge}, {band_edge}]")]
    OutOfBand { frequency: f64, band_edge: f64 },
    #[error("integrand is not finite at f = {frequency} Hz")]
    NonFiniteIntegrand { frequency: f64 },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("{matrix} is not positive definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite {
        matrix: String,
        min_eigenvalue: f64,
    },
    #[error("user index {index} out of range for {users} users")]
    UserIndex { index: usize, users: usize },
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("sample set is empty")]
    EmptySamples,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    reason: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
