use thiserror::Error;

/// Failures raised by the arithmetic kernel.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("not a unit: {0}")]
    NotAUnit(String),
    #[error("jacobian of the change of variables is singular mod p")]
    SingularJacobian,
    #[error("cross exponent {exponent} exceeds band {band}")]
    BandOverflow { exponent: i64, band: i64 },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("exponent depth exhausted: {0}")]
    DepthExhausted(String),
    #[error("fixpoint failed to stabilize at step {step}, generator {index}: {detail}")]
    StabilizationFailure {
        step: usize,
        index: usize,
        detail: String,
    },
    #[error("value is not certified: {0}")]
    Uncertified(String),
    #[error("determinant vanishes at working precision")]
    ZeroDeterminant,
    #[error("non-integral structure polynomial coefficient: {0}")]
    NonIntegral(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
