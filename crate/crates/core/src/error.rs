use thiserror::Error;

/// Errors raised by model construction, closed forms and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability out of range [0, 1]: {name} = {value}")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("transition row {row} sums to {sum}, expected 1")]
    RowSum { row: &'static str, sum: f64 },

    #[error("degenerate chain (p01 = p10 = 0): stationary distribution undefined")]
    DegenerateChain,

    #[error("closed form requires positively correlated channel (p11 > p01), got p11 = {p11}, p01 = {p01}")]
    NotPositivelyCorrelated { p11: f64, p01: f64 },

    #[error("at least two channels are required, got {0}")]
    TooFewChannels(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("chain truncation insufficient: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::ProbabilityOutOfRange { name, value })
    }
}
