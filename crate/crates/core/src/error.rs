use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("negative evolution time t = {0}")]
    NegativeTime(f64),

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("hypergeometric series failed to converge for a = {a}, b = {b}, c = {c}, z = {z}")]
    NonConvergence { a: f64, b: f64, c: f64, z: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("parameter `{0}` is not identifiable at this operating point")]
    NonIdentifiable(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}
