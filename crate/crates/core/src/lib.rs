//! Color texture descriptors built from local binary patterns.
//!
//! The crate provides the building blocks (color planes, LBP coding, a Gabor
//! filter bank, an orthonormal 2D DCT), the two composite descriptors that run
//! cross-color-space LBP on Gabor amplitudes ([`descriptors::g_albpcsf`]) or on
//! low-frequency DCT reconstructions ([`descriptors::d_albpcsf`]), histogram
//! dissimilarities, and leave-one-out evaluation with confusion-matrix
//! indicators.

pub mod albpcsf;
pub mod dct;
pub mod descriptors;
pub mod error;
pub mod evaluation;
pub mod gabor;
pub mod image;
pub mod lbp;
pub mod similarity;
pub mod synth;

pub use error::{Error, Result};
pub use image::{Channel, ColorImage, ColorSpace, PlaneF};
