//! Whole-image compression and decompression built from the block
//! primitives.

use super::color::{rgb_to_ycbcr_px, ycbcr_to_rgb_px};
use super::dct::{dct2_8x8, idct2_8x8};
use super::quant::{qf_to_qm, quantize, ComponentKind, QuantMatrix};
use super::resample::{chroma_downsample, chroma_upsample};
use super::BlockDctError;
use crate::pixels::{ColorSpace, PixelImage, Plane};
use crate::quantized::{CoefficientPlane, Component, QuantizedImage, Subsampling};
use crate::BLOCK;

/// Level shift and transform every 8x8 block of a sample plane. The result
/// keeps the block layout of [`CoefficientPlane`].
pub fn forward_dct_plane(plane: &Plane) -> Plane {
    assert!(plane.height % BLOCK == 0 && plane.width % BLOCK == 0);
    let mut out = Plane::new(plane.height, plane.width);
    for bi in 0..plane.height / BLOCK {
        for bj in 0..plane.width / BLOCK {
            let block = std::array::from_fn(|i| {
                plane.get(bi * BLOCK + i / BLOCK, bj * BLOCK + i % BLOCK) - 128.0
            });
            let coeffs = dct2_8x8(&block);
            for (i, &c) in coeffs.iter().enumerate() {
                out.set(bi * BLOCK + i / BLOCK, bj * BLOCK + i % BLOCK, c);
            }
        }
    }
    out
}

/// Blockwise inverse transform plus the +128 level shift, no clamping.
pub fn inverse_dct_plane(coeffs: &Plane) -> Plane {
    assert!(coeffs.height % BLOCK == 0 && coeffs.width % BLOCK == 0);
    let mut out = Plane::new(coeffs.height, coeffs.width);
    for bi in 0..coeffs.height / BLOCK {
        for bj in 0..coeffs.width / BLOCK {
            let block =
                std::array::from_fn(|i| coeffs.get(bi * BLOCK + i / BLOCK, bj * BLOCK + i % BLOCK));
            let samples = idct2_8x8(&block);
            for (i, &s) in samples.iter().enumerate() {
                out.set(bi * BLOCK + i / BLOCK, bj * BLOCK + i % BLOCK, s + 128.0);
            }
        }
    }
    out
}

/// Quantized plane multiplied blockwise by its table.
pub fn dequantized_plane(coeffs: &CoefficientPlane, qm: &QuantMatrix) -> Plane {
    Plane::from_fn(coeffs.height, coeffs.width, |r, c| {
        coeffs.get(r, c) as f64 * qm.at(r % BLOCK, c % BLOCK) as f64
    })
}

fn quantize_plane(coeffs: &Plane, qm: &QuantMatrix) -> CoefficientPlane {
    let mut out = CoefficientPlane::zeros(coeffs.height, coeffs.width);
    for bi in 0..coeffs.height / BLOCK {
        for bj in 0..coeffs.width / BLOCK {
            let block =
                std::array::from_fn(|i| coeffs.get(bi * BLOCK + i / BLOCK, bj * BLOCK + i % BLOCK));
            out.set_block(bi, bj, &quantize(&block, qm));
        }
    }
    out
}

/// Colour-converted sample planes (Y, Cb, Cr or a single gray plane) at
/// full resolution.
fn component_planes(img: &PixelImage) -> Result<Vec<Plane>, BlockDctError> {
    match img.colorspace {
        ColorSpace::Gray => Ok(vec![img.planes[0].clone()]),
        ColorSpace::Rgb => {
            let (h, w) = img.dims();
            let mut out = vec![Plane::new(h, w), Plane::new(h, w), Plane::new(h, w)];
            for i in 0..h * w {
                let (y, cb, cr) = rgb_to_ycbcr_px(
                    img.planes[0].data[i],
                    img.planes[1].data[i],
                    img.planes[2].data[i],
                );
                out[0].data[i] = y.clamp(0.0, 255.0);
                out[1].data[i] = cb.clamp(0.0, 255.0);
                out[2].data[i] = cr.clamp(0.0, 255.0);
            }
            Ok(out)
        }
        found => Err(BlockDctError::WrongColorspace {
            expected: ColorSpace::Rgb,
            found,
        }),
    }
}

fn effective_subsampling(img: &PixelImage, subsampling: Subsampling) -> Subsampling {
    if img.colorspace == ColorSpace::Gray {
        Subsampling::S444
    } else {
        subsampling
    }
}

/// Unquantized DCT coefficients of every component at full resolution,
/// padded (edge replication) to the luma plane size `subsampling` implies.
/// These are the lossless targets for coefficient recovery.
pub fn lossless_coefficients(
    img: &PixelImage,
    subsampling: Subsampling,
) -> Result<Vec<Plane>, BlockDctError> {
    let subsampling = effective_subsampling(img, subsampling);
    let planes = component_planes(img)?;
    let (ph, pw) = QuantizedImage::plane_dims(img.dims(), planes.len(), subsampling)[0];
    Ok(planes
        .iter()
        .map(|p| forward_dct_plane(&p.pad_edge(ph, pw)))
        .collect())
}

/// JPEG-compress an RGB or gray image down to its quantized coefficients.
pub fn compress(
    img: &PixelImage,
    qf: u32,
    subsampling: Subsampling,
) -> Result<QuantizedImage, BlockDctError> {
    let luma_qm = qf_to_qm(qf, ComponentKind::Luma)?;
    let chroma_qm = qf_to_qm(qf, ComponentKind::Chroma)?;
    let subsampling = effective_subsampling(img, subsampling);
    let planes = component_planes(img)?;
    let dims = QuantizedImage::plane_dims(img.dims(), planes.len(), subsampling);
    let (ph, pw) = dims[0];

    let mut components = Vec::with_capacity(planes.len());
    for (c, plane) in planes.iter().enumerate() {
        let padded = plane.pad_edge(ph, pw);
        let sampled = if c > 0 && subsampling == Subsampling::S420 {
            chroma_downsample(&padded)?
        } else {
            padded
        };
        debug_assert_eq!((sampled.height, sampled.width), dims[c]);
        let qm = if c == 0 { &luma_qm } else { &chroma_qm };
        components.push(Component {
            id: c as u8 + 1,
            coeffs: quantize_plane(&forward_dct_plane(&sampled), qm),
            qm_index: usize::from(c > 0),
        });
    }
    let quant_tables = if planes.len() == 1 {
        vec![luma_qm]
    } else {
        vec![luma_qm, chroma_qm]
    };
    Ok(QuantizedImage {
        components,
        quant_tables,
        subsampling,
        pixel_dims: img.dims(),
    })
}

/// Decoded samples of a coefficient plane, clamped to the 8-bit range but
/// not rounded.
pub fn decoded_samples(coeffs: &Plane) -> Plane {
    inverse_dct_plane(coeffs).map(|v| v.clamp(0.0, 255.0))
}

fn to_byte(v: f64) -> f64 {
    v.clamp(0.0, 255.0).round()
}

/// Turn full-resolution component sample planes (Y, Cb, Cr or gray) into an
/// 8-bit-valued image cropped to `pixel_dims`. Colour conversion output is
/// clamped and rounded; input samples are used as given.
pub fn ycbcr_planes_to_image(planes: &[Plane], pixel_dims: (usize, usize)) -> PixelImage {
    let (h, w) = pixel_dims;
    if planes.len() == 1 {
        let p = planes[0].crop(h, w).map(to_byte);
        return PixelImage::new(vec![p], ColorSpace::Gray);
    }
    let mut out = vec![Plane::new(h, w), Plane::new(h, w), Plane::new(h, w)];
    let s = |k: usize, r, c| planes[k].get(r, c);
    for r in 0..h {
        for c in 0..w {
            let (red, green, blue) = ycbcr_to_rgb_px(s(0, r, c), s(1, r, c), s(2, r, c));
            out[0].set(r, c, red.clamp(0.0, 255.0).round());
            out[1].set(r, c, green.clamp(0.0, 255.0).round());
            out[2].set(r, c, blue.clamp(0.0, 255.0).round());
        }
    }
    PixelImage::new(out, ColorSpace::Rgb)
}

/// Standard decode: dequantize, inverse DCT, clamp, bilinear chroma
/// upsampling, colour conversion, crop. Output samples are integers.
pub fn decompress(img: &QuantizedImage) -> PixelImage {
    let luma_dims = (img.components[0].coeffs.height, img.components[0].coeffs.width);
    let planes: Vec<Plane> = img
        .components
        .iter()
        .map(|comp| {
            let qm = &img.quant_tables[comp.qm_index];
            let samples = decoded_samples(&dequantized_plane(&comp.coeffs, qm));
            if (samples.height, samples.width) == luma_dims {
                samples
            } else {
                chroma_upsample(&samples)
            }
        })
        .collect();
    ycbcr_planes_to_image(&planes, img.pixel_dims)
}

/// Translate towards the bottom right by (dx, dy); uncovered pixels take the
/// nearest edge value.
pub fn shift_image(img: &PixelImage, dx: usize, dy: usize) -> PixelImage {
    let (h, w) = img.dims();
    PixelImage {
        planes: img
            .planes
            .iter()
            .map(|p| {
                Plane::from_fn(h, w, |r, c| {
                    p.get_clamped(r as isize - dy as isize, c as isize - dx as isize)
                })
            })
            .collect(),
        colorspace: img.colorspace,
    }
}

/// Double compression: compress at `qf1`, decode, shift by `shift = (dx, dy)`
/// and compress again at `qf2`. A zero shift is the aligned case.
pub fn degrade_double(
    img: &PixelImage,
    qf1: u32,
    qf2: u32,
    shift: (usize, usize),
    subsampling: Subsampling,
) -> Result<QuantizedImage, BlockDctError> {
    let (dx, dy) = shift;
    if dx > 7 || dy > 7 {
        return Err(BlockDctError::ShiftOutOfRange(dx, dy));
    }
    qf_to_qm(qf2, ComponentKind::Luma)?;
    let first = decompress(&compress(img, qf1, subsampling)?);
    compress(&shift_image(&first, dx, dy), qf2, subsampling)
}
