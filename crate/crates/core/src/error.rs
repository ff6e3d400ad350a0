use thiserror::Error;

/// Errors raised by the rate models and their helpers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("{0} diverges for a zero loading efficiency")]
    Divergence(&'static str),
    #[error("a lossless channel (eta_ch = 1) has unbounded repeaterless capacity")]
    InfiniteCapacity,
    #[error("scaling fit needs at least 3 usable points, found {0}")]
    InsufficientPoints(usize),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        expected,
    }
}

/// `value` must lie in [0, 1].
pub(crate) fn check_prob(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(domain(name, value, "[0, 1]"))
    }
}

pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && !value.is_nan() {
        Ok(value)
    } else {
        Err(domain(name, value, "[0, inf)"))
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(domain(name, value, "(0, inf)"))
    }
}
