use thiserror::Error;

/// Errors raised by the spectral and map-analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "zero mode has modulus {modulus:e}, above the tolerance {tolerance:e} required by a negative-order operator"
    )]
    MeanNotZero { modulus: f64, tolerance: f64 },

    #[error("map is not sphere-valued: max ||u|-1| = {deviation:e} exceeds {tolerance:e}")]
    NotOnSphere { deviation: f64, tolerance: f64 },

    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    #[error("degree undetermined: winding integral {value} is {distance} away from the nearest integer")]
    DegreeUndetermined { value: f64, distance: f64 },

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("extraction unreliable: renormalization shift {shift:e} exceeds {limit:e}")]
    ExtractionUnreliable { shift: f64, limit: f64 },

    #[error("inconsistent profile: {0}")]
    InconsistentProfile(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("insufficient family: {0} member(s), at least 2 required")]
    InsufficientFamily(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<S: Into<String>>(msg: S) -> Error {
    Error::InvalidInput(msg.into())
}
