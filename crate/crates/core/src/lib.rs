//! Coefficient-level JPEG toolkit.
//!
//! This crate holds everything that does not learn: the baseline JFIF
//! bitstream reader/writer, the lossy block-DCT arithmetic (colour transform,
//! DCT, IJG quality scaling, chroma resampling, single and double
//! compression), the collocated coefficient layout fed to the restoration
//! network, and the pixel/DCT-domain quality metrics.

pub mod blockdct;
pub mod collocate;
pub mod jfif;
pub mod metrics;
pub mod pixels;
pub mod pnm;
mod quantized;

pub use blockdct::{ComponentKind, QuantMatrix};
pub use collocate::CollocatedMap;
pub use pixels::{ColorSpace, PixelImage, Plane};
pub use quantized::{CoefficientPlane, Component, QuantizedImage, Subsampling};

/// Side length of a JPEG transform block.
pub const BLOCK: usize = 8;
/// Coefficients per block.
pub const BLOCK_AREA: usize = 64;
