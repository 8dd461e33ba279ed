use thiserror::Error;

/// Errors raised by grid construction, norm evaluation and the verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("inadmissible exponent tuple: {0}")]
    InadmissibleTuple(String),
    #[error("dilated support escapes the box: radius {radius} >= half-width {half_width}")]
    SupportEscape { radius: f64, half_width: f64 },
    #[error("grid specs differ")]
    MismatchedSpecs,
    #[error("cube at level {level} is not aligned with a grid of {points} points per axis")]
    UnalignedCube { level: u32, points: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
}

pub type Result<T> = std::result::Result<T, Error>;
