use thiserror::Error;

use crate::detect::BBox;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid image dimensions {width}x{height} with {len} data values")]
    InvalidDimensions { width: u32, height: u32, len: usize },

    #[error("binary image value {value} at index {index} is neither 0 nor 255")]
    NotBinary { index: usize, value: u8 },

    #[error("decode error at byte {offset}: {reason}")]
    Decode { offset: usize, reason: String },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("encode error: {0}")]
    Encode(String),

    #[error(
        "dimension mismatch: {}x{} vs {}x{} (inputs must be pixel-aligned)",
        left.0, left.1, right.0, right.1
    )]
    DimensionMismatch { left: (u32, u32), right: (u32, u32) },

    #[error("pixel ({x}, {y}) lies outside a {width}x{height} image")]
    PixelOutOfBounds { x: u32, y: u32, width: u32, height: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown class id {0}")]
    UnknownClassId(i64),

    #[error("unknown class name {0:?}")]
    UnknownClassName(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("box {bbox} lies entirely outside the {width}x{height} image")]
    BoxOutsideImage { bbox: BBox, width: u32, height: u32 },

    #[error("region {bbox} is not fully inside the {width}x{height} image")]
    RegionOutOfBounds { bbox: BBox, width: u32, height: u32 },

    #[error("patch {patch} overlaps target {target}")]
    PatchOverlap { patch: BBox, target: BBox },

    #[error("no bare patch found for {class} at {bbox}")]
    NoBarePatch { class: String, bbox: BBox },

    #[error("accuracy is undefined when tp + fp + fn = 0")]
    UndefinedAccuracy,

    #[error("detector config violates filters = (classes + 5) * 3: {num_classes} classes need {expected} filters, got {actual}")]
    FilterMismatch {
        num_classes: u32,
        expected: u32,
        actual: u32,
    },
}
