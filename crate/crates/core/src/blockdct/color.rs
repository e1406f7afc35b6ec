//! Full-range BT.601 colour transform as used by JFIF.

use super::BlockDctError;
use crate::pixels::{ColorSpace, PixelImage, Plane};

#[inline]
pub fn rgb_to_ycbcr_px(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let cb = -0.168_736 * r - 0.331_264 * g + 0.5 * b + 128.0;
    let cr = 0.5 * r - 0.418_688 * g - 0.081_312 * b + 128.0;
    (y, cb, cr)
}

/// Unclamped inverse of [`rgb_to_ycbcr_px`].
#[inline]
pub fn ycbcr_to_rgb_px(y: f64, cb: f64, cr: f64) -> (f64, f64, f64) {
    let cb = cb - 128.0;
    let cr = cr - 128.0;
    let r = y + 1.402 * cr;
    let g = y - 0.344_136 * cb - 0.714_136 * cr;
    let b = y + 1.772 * cb;
    (r, g, b)
}

fn convert(
    img: &PixelImage,
    from: ColorSpace,
    to: ColorSpace,
    f: fn(f64, f64, f64) -> (f64, f64, f64),
) -> Result<PixelImage, BlockDctError> {
    if img.colorspace != from {
        return Err(BlockDctError::WrongColorspace {
            expected: from,
            found: img.colorspace,
        });
    }
    let (h, w) = img.dims();
    let mut out = [Plane::new(h, w), Plane::new(h, w), Plane::new(h, w)];
    for i in 0..h * w {
        let (a, b, c) = f(
            img.planes[0].data[i],
            img.planes[1].data[i],
            img.planes[2].data[i],
        );
        out[0].data[i] = a.clamp(0.0, 255.0);
        out[1].data[i] = b.clamp(0.0, 255.0);
        out[2].data[i] = c.clamp(0.0, 255.0);
    }
    Ok(PixelImage::new(out.to_vec(), to))
}

/// RGB to YCbCr; results are clamped to [0, 255].
pub fn rgb_to_ycbcr(img: &PixelImage) -> Result<PixelImage, BlockDctError> {
    convert(img, ColorSpace::Rgb, ColorSpace::YCbCr, rgb_to_ycbcr_px)
}

/// YCbCr to RGB; results are clamped to [0, 255].
pub fn ycbcr_to_rgb(img: &PixelImage) -> Result<PixelImage, BlockDctError> {
    convert(img, ColorSpace::YCbCr, ColorSpace::Rgb, ycbcr_to_rgb_px)
}
