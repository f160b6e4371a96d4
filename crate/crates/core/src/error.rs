use thiserror::Error;

pub type Result<T> = std::result::Result<T, HomError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HomError {
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("{what} = {value} lies outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("{what} is not finite")]
    NonFinite { what: &'static str },

    #[error("frequency grid span {span} rad/ps is narrower than the required {required} rad/ps")]
    GridTooNarrow { span: f64, required: f64 },

    #[error("frequency grid needs at least {min} points, got {got}")]
    GridTooSmall { got: usize, min: usize },

    #[error("spectral amplitudes are sampled on different frequency grids")]
    GridMismatch,

    #[error("dip FWHM {fwhm} ps is below the dispersion-free minimum {minimum} ps")]
    InfeasibleWidth { fwhm: f64, minimum: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("expected rate at point {index} is negative ({value})")]
    NegativeRate { index: usize, value: f64 },

    #[error("curve has no counts")]
    MissingCounts,

    #[error("fit needs at least {min} points, got {got}")]
    TooFewPoints { got: usize, min: usize },

    #[error("fit did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("no dip found: fitted visibility {visibility} with uncertainty {sigma}")]
    DipNotFound { visibility: f64, sigma: f64 },

    #[error("{failed} of {total} Monte-Carlo trials failed; last error: {last}")]
    TooManyFailedTrials {
        failed: usize,
        total: usize,
        last: String,
    },
}

pub(crate) fn ensure_positive(what: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(HomError::NonFinite { what });
    }
    if value <= 0.0 {
        return Err(HomError::NonPositive { what, value });
    }
    Ok(())
}

pub(crate) fn ensure_non_negative(what: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(HomError::NonFinite { what });
    }
    if value < 0.0 {
        return Err(HomError::OutOfRange {
            what,
            value,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    Ok(())
}

pub(crate) fn ensure_finite(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(HomError::NonFinite { what })
    }
}

pub(crate) fn ensure_unit_interval(what: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(HomError::NonFinite { what });
    }
    if !(0.0..=1.0).contains(&value) {
        return Err(HomError::OutOfRange {
            what,
            value,
            min: 0.0,
            max: 1.0,
        });
    }
    Ok(())
}
