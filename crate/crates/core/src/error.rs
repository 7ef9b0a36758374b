use thiserror::Error;

/// Errors produced by the library.
///
/// Variants are grouped by the stage that raises them so the CLI can map
/// each class onto its own exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("image too small: {width}x{height} (minimum {min}x{min})")]
    ImageTooSmall { width: u32, height: u32, min: u32 },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invariant violation (feature {feature_id:?}): {reason}")]
    InvariantViolation { feature_id: Option<usize>, reason: String },

    #[error("degenerate instance: within-column feature distance is zero")]
    DegenerateInstance,

    #[error("insufficient points: got {got}, need at least {need}")]
    InsufficientPoints { got: usize, need: usize },

    #[error("degenerate point set: all points coincide")]
    DegenerateLine,

    #[error("insufficient lines: got {got}, need at least {need}")]
    InsufficientLines { got: usize, need: usize },

    #[error("no consensus: best support {best} lines, need at least {need}")]
    NoConsensus { best: usize, need: usize },

    #[error("points are not colinear (max offset {offset:.3e} relative to span)")]
    NonColinear { offset: f64 },

    #[error("degenerate point configuration: coincident points")]
    DegeneratePoints,

    #[error("vanishing point lies inside the pattern region; rectification would fold it")]
    VpInsidePattern,

    #[error("detection region has zero area")]
    ZeroAreaDetection,

    #[error("unpaired records: {left} predictions vs {right} ground-truth entries")]
    UnpairedRecords { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("no insertion point for the count in caption {0:?}")]
    NoInsertionPoint(String),

    #[error("value {value} out of range [{min}, {max}]")]
    OutOfRange { value: i64, min: i64, max: i64 },

    #[error("scene instance {index} falls outside the image bounds")]
    InstanceOutOfBounds { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no inputs could be processed")]
    ZeroInputs,

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit codes, one per error class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const MISSING_INPUT: i32 = 3;
    pub const PARSE: i32 = 4;
    pub const INVARIANT: i32 = 5;
    pub const STAGE: i32 = 6;
    pub const ZERO_INPUTS: i32 = 7;
    pub const IO: i32 = 8;
}

impl Error {
    /// The error with any stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Io(e) if e.kind() == std::io::ErrorKind::NotFound => exit::MISSING_INPUT,
            Error::Io(_) => exit::IO,
            Error::Parse(_) | Error::UnsupportedFormat(_) | Error::Image(_) => exit::PARSE,
            Error::InvariantViolation { .. } => exit::INVARIANT,
            Error::InvalidArgument(_) => exit::USAGE,
            Error::ZeroInputs => exit::ZERO_INPUTS,
            _ => exit::STAGE,
        }
    }
}

/// Tags an error with the stage that raised it.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| match e {
            Error::Stage { .. } => e,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        })
    }
}
