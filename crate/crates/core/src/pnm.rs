//! Binary PPM (P6) and PGM (P5) reading and writing, maxval 255.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::pixels::{ColorSpace, PixelImage, Plane};

#[derive(Debug, Error)]
pub enum PnmError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a binary PPM/PGM file (magic {0:?})")]
    BadMagic(String),
    #[error("malformed header: {0}")]
    BadHeader(&'static str),
    #[error("unsupported maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(usize),
    #[error("pixel data truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{0} images cannot be written as PNM")]
    WrongColorspace(ColorSpace),
}

fn header_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8], PnmError> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(PnmError::BadHeader("unexpected end of header"));
    }
    Ok(&bytes[start..*pos])
}

fn header_number(bytes: &[u8], pos: &mut usize) -> Result<usize, PnmError> {
    let tok = header_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or(PnmError::BadHeader("expected a decimal number"))
}

/// Decode a P5 (gray) or P6 (RGB) byte stream.
pub fn decode(bytes: &[u8]) -> Result<PixelImage, PnmError> {
    let mut pos = 0;
    let magic = header_token(bytes, &mut pos)?;
    let colorspace = match magic {
        b"P6" => ColorSpace::Rgb,
        b"P5" => ColorSpace::Gray,
        other => return Err(PnmError::BadMagic(String::from_utf8_lossy(other).into_owned())),
    };
    let width = header_number(bytes, &mut pos)?;
    let height = header_number(bytes, &mut pos)?;
    let maxval = header_number(bytes, &mut pos)?;
    if maxval != 255 {
        return Err(PnmError::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(PnmError::BadHeader("zero dimension"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let expected = width * height * colorspace.channels();
    let found = bytes.len().saturating_sub(pos);
    if found < expected {
        return Err(PnmError::Truncated { expected, found });
    }
    Ok(PixelImage::from_interleaved_u8(
        height,
        width,
        colorspace,
        &bytes[pos..pos + expected],
    ))
}

/// Encode as P6 (RGB) or P5 (gray); samples are rounded and clamped.
pub fn encode(img: &PixelImage) -> Result<Vec<u8>, PnmError> {
    let magic = match img.colorspace {
        ColorSpace::Rgb => "P6",
        ColorSpace::Gray => "P5",
        cs => return Err(PnmError::WrongColorspace(cs)),
    };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_interleaved_u8());
    Ok(out)
}

pub fn read(path: impl AsRef<Path>) -> Result<PixelImage, PnmError> {
    decode(&fs::read(path)?)
}

pub fn write(path: impl AsRef<Path>, img: &PixelImage) -> Result<(), PnmError> {
    fs::write(path, encode(img)?)?;
    Ok(())
}

/// Write a plane as PGM after an affine map of its [min, max] onto [0, 255].
pub fn write_normalized_pgm(path: impl AsRef<Path>, plane: &Plane) -> Result<(), PnmError> {
    let (lo, hi) = plane.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let scaled = plane.map(|v| (v - lo) / span * 255.0);
    write(path, &PixelImage::new(vec![scaled], ColorSpace::Gray))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_with_comment_parses() {
        let mut bytes = b"P5\n# a comment\n2 1\n255\n".to_vec();
        bytes.extend([7u8, 200]);
        let img = decode(&bytes).unwrap();
        assert_eq!(img.dims(), (1, 2));
        assert_eq!(img.planes[0].data, vec![7.0, 200.0]);
    }

    #[test]
    fn rgb_roundtrip() {
        let samples: Vec<u8> = (0..(3 * 4 * 3)).map(|i| (i * 7) as u8).collect();
        let img = PixelImage::from_interleaved_u8(3, 4, ColorSpace::Rgb, &samples);
        let back = decode(&encode(&img).unwrap()).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn rejects_16bit_and_truncation() {
        assert!(matches!(
            decode(b"P5 1 1 65535\n\0\0"),
            Err(PnmError::UnsupportedMaxval(65535))
        ));
        assert!(matches!(
            decode(b"P6 2 2 255\n\x01\x02"),
            Err(PnmError::Truncated { .. })
        ));
        assert!(matches!(decode(b"P3 1 1 255\n0 0 0"), Err(PnmError::BadMagic(_))));
    }
}
