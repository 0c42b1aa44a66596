use thiserror::Error;

use crate::image::{Channel, ColorSpace};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("image {width}x{height} is smaller than the 3x3 minimum")]
    ImageTooSmall { width: usize, height: usize },

    #[error("buffer holds {actual} samples, expected {expected}")]
    BufferSize { expected: usize, actual: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("expected a {expected:?} image, got {actual:?}")]
    WrongColorSpace {
        expected: ColorSpace,
        actual: ColorSpace,
    },

    #[error("channel {channel} not in {space} image")]
    ChannelMismatch { channel: Channel, space: ColorSpace },

    #[error("plane dimensions differ: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("plane {width}x{height} is too small: need at least {min_side}x{min_side}")]
    PlaneTooSmall {
        width: usize,
        height: usize,
        min_side: usize,
    },

    #[error("invalid LBP configuration: {0}")]
    InvalidLbpConfig(String),

    #[error("code {code} does not fit in {n_bins} bins")]
    CodeOutOfRange { code: u32, n_bins: usize },

    #[error("invalid Gabor parameters: {0}")]
    InvalidGaborParams(String),

    #[error("kernel size must be odd and at least {min}, got {size}")]
    InvalidKernelSize { size: usize, min: usize },

    #[error("invalid DCT selector: {0}")]
    InvalidSelector(String),

    #[error("histogram lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("histogram is not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },

    #[error("histogram has a negative bin at index {index}")]
    NegativeBin { index: usize },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),
}
