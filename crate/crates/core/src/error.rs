use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside its valid domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),

    #[error(
        "distortion polynomial is not increasing at theta = {theta} (theta_max = {theta_max})"
    )]
    NonMonotone { theta: f64, theta_max: f64 },

    #[error("ray incidence angle {theta} exceeds the field of view ({theta_max})")]
    OutsideFieldOfView { theta: f64, theta_max: f64 },

    #[error("pixel ({x}, {y}) has radius {radius} beyond the invertible range {max_radius}")]
    PixelOutOfRange {
        x: usize,
        y: usize,
        radius: f64,
        max_radius: f64,
    },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("rotation is not orthonormal with unit determinant")]
    InvalidRotation,

    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("mask has {0} 4-connected components, expected 1")]
    MultipleComponents(usize),

    #[error("contour has {0} points, need at least {1}")]
    ContourTooShort(usize, usize),

    #[error("loss of task {task} at epoch {epoch} is {value}; losses must be positive and finite")]
    InvalidLoss {
        task: usize,
        epoch: usize,
        value: f64,
    },
}
