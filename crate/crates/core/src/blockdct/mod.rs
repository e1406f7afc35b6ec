//! The lossy arithmetic of JPEG: colour transform, 8x8 DCT, IJG quality
//! scaling and quantization, chroma resampling, and whole-image single and
//! double compression.

mod codec;
mod color;
mod dct;
mod quant;
mod resample;

use thiserror::Error;

use crate::pixels::ColorSpace;

pub use codec::{
    compress, decompress, degrade_double, dequantized_plane, forward_dct_plane,
    decoded_samples, inverse_dct_plane, lossless_coefficients, shift_image, ycbcr_planes_to_image,
};
pub use color::{rgb_to_ycbcr, rgb_to_ycbcr_px, ycbcr_to_rgb, ycbcr_to_rgb_px};
pub use dct::{dct2_8x8, dct_basis, idct2_8x8, Block};
pub use quant::{
    dequantize, qf_to_qm, quantize, ComponentKind, QuantMatrix, ANNEX_K_CHROMA, ANNEX_K_LUMA,
};
pub use resample::{chroma_downsample, chroma_upsample};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlockDctError {
    #[error("expected a {expected} image, got {found}")]
    WrongColorspace {
        expected: ColorSpace,
        found: ColorSpace,
    },
    #[error("quality factor {0} outside 1..=100")]
    QfOutOfRange(u32),
    #[error("plane dims {0}x{1} must be even for 2x2 downsampling")]
    OddDims(usize, usize),
    #[error("shift ({0}, {1}) outside 0..=7")]
    ShiftOutOfRange(usize, usize),
}
