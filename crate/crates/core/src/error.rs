use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector is not tangent at the base point (segment {segment}, normal component {deviation:e})")]
    NotTangent { segment: usize, deviation: f64 },

    #[error("antipodal points on segment {segment} (angle {angle}): geodesic is not unique")]
    AntipodalPoints { segment: usize, angle: f64 },

    #[error("{0}")]
    Domain(String),

    #[error("invalid factor: {0}")]
    InvalidFactor(String),

    #[error("zero quaternion cannot be normalized")]
    ZeroQuaternion,

    #[error("invalid representation config: {0}")]
    InvalidConfig(String),

    #[error("next frame is required when temporal-difference factors are enabled")]
    MissingNextFrame,

    #[error("skeleton mismatch: {0}")]
    SkeletonMismatch(String),

    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(String),

    #[error("representation has no rotation factor; cannot recover a motion frame")]
    ConfigLacksRotations,

    #[error("degenerate landmark configuration (all joints coincide)")]
    DegenerateConfiguration,

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("sequence too short: {len} frames, need at least {min}")]
    SequenceTooShort { len: usize, min: usize },

    #[error("frame {frame}: {reason}")]
    InvalidFrame { frame: usize, reason: String },

    #[error("t = {0} is too close to 1 for the conditional target")]
    TimeTooCloseToOne(f64),

    #[error("unknown condition class {class} (network has {available} user classes)")]
    UnknownConditionClass { class: usize, available: usize },

    #[error("step {step} out of range (total {total})")]
    StepOutOfRange { step: usize, total: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite loss at step {step}")]
    NonFiniteLoss { step: usize },

    #[error("empty batch")]
    EmptyBatch,

    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: String, reason: String },

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
