use alloc::string::String;

use crate::consistency::FlowKind;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, found {found:?} (width, height)")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("buffer length {found} does not match expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("unsupported channel count {0}")]
    UnsupportedChannels(usize),
    #[error("intensity {value} at index {index} is outside [0, 1]")]
    IntensityOutOfRange { index: usize, value: f64 },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("empty comparison: no valid pixels")]
    EmptyComparison,
    #[error("cannot crop {rows} rows from an image of height {height}")]
    CropTooLarge { rows: usize, height: usize },
    #[error("not a flow file")]
    NotAFlowFile,
    #[error("truncated flow file")]
    TruncatedFlowFile,
    #[error("unexpected trailing bytes after flow payload")]
    TrailingData,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("sequence too short: {metric} needs at least {required} frames, got {found}")]
    SequenceTooShort {
        metric: &'static str,
        required: usize,
        found: usize,
    },
    #[error("frame {frame}: missing {kind} flow")]
    MissingFlow { frame: usize, kind: FlowKind },
    #[error("timestamps must be strictly increasing (index {0})")]
    NonMonotonicTimestamps(usize),
    #[error("extrapolation forbidden: t={t} outside [{start}, {end}]")]
    Extrapolation { t: f64, start: f64, end: f64 },
    #[error("no timestamp matches within {max_dt} s")]
    NoMatches { max_dt: f64 },
    #[error("no pairs for any segment length")]
    NoPairs,
    #[error("degenerate alignment: {0}")]
    DegenerateAlignment(&'static str),
    #[error("motion moves every pixel out of frame")]
    MotionOutOfFrame,
}
