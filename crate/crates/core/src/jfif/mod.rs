//! Baseline sequential JFIF at the quantized-coefficient level.
//!
//! [`parse_jpeg`] recovers the entropy-coded coefficients exactly (DC
//! prediction and zigzag undone), and [`encode_jpeg`] writes them back with
//! the Annex K Huffman tables, so `parse_jpeg(&encode_jpeg(&q)?)? == q`.

mod decoder;
mod encoder;
mod huffman;

use thiserror::Error;

pub use decoder::parse_jpeg;
pub use encoder::encode_jpeg;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JfifError {
    #[error("missing marker: {0}")]
    MissingMarker(&'static str),
    #[error("unsupported JPEG process: {0}")]
    UnsupportedProcess(String),
    #[error("unsupported sampling: {0}")]
    UnsupportedSampling(String),
    #[error("corrupt entropy-coded data: {0}")]
    CorruptEntropyStream(String),
    #[error("malformed marker segment: {0}")]
    MalformedSegment(String),
    #[error("coefficient {value} needs more than {max_bits} magnitude bits")]
    RangeOverflow { value: i32, max_bits: u8 },
    #[error("invalid quantized image: {0}")]
    InvalidImage(String),
}

/// `ZIGZAG[i]` is the natural (raster) index of the i-th coefficient in
/// zigzag scan order.
pub(crate) const ZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27,
    20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58,
    59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

pub(crate) mod marker {
    pub const SOI: u8 = 0xD8;
    pub const EOI: u8 = 0xD9;
    pub const SOF0: u8 = 0xC0;
    pub const SOF1: u8 = 0xC1;
    pub const DHT: u8 = 0xC4;
    pub const DAC: u8 = 0xCC;
    pub const SOS: u8 = 0xDA;
    pub const DQT: u8 = 0xDB;
    pub const DRI: u8 = 0xDD;
    pub const APP0: u8 = 0xE0;
    pub const RST0: u8 = 0xD0;
    pub const RST7: u8 = 0xD7;
}
