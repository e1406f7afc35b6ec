//! 2x chroma resampling: box-filter decimation and half-sample aligned
//! bilinear interpolation.

use super::BlockDctError;
use crate::pixels::Plane;

/// 2x2 box mean.
pub fn chroma_downsample(plane: &Plane) -> Result<Plane, BlockDctError> {
    if plane.height % 2 != 0 || plane.width % 2 != 0 {
        return Err(BlockDctError::OddDims(plane.height, plane.width));
    }
    Ok(Plane::from_fn(plane.height / 2, plane.width / 2, |r, c| {
        0.25 * (plane.get(2 * r, 2 * c)
            + plane.get(2 * r, 2 * c + 1)
            + plane.get(2 * r + 1, 2 * c)
            + plane.get(2 * r + 1, 2 * c + 1))
    }))
}

/// One axis of the interpolation: output sample `2k` sits a quarter sample
/// before source `k`, output `2k + 1` a quarter after; edges replicate.
fn upsample_1d(src: &[f64], dst: &mut [f64]) {
    let n = src.len();
    for k in 0..n {
        let prev = src[k.saturating_sub(1)];
        let next = src[(k + 1).min(n - 1)];
        dst[2 * k] = 0.75 * src[k] + 0.25 * prev;
        dst[2 * k + 1] = 0.75 * src[k] + 0.25 * next;
    }
}

/// Bilinear x2 in both axes.
pub fn chroma_upsample(plane: &Plane) -> Plane {
    let (h, w) = (plane.height, plane.width);
    let mut wide = Plane::new(h, 2 * w);
    for r in 0..h {
        upsample_1d(
            &plane.data[r * w..(r + 1) * w],
            &mut wide.data[r * 2 * w..(r + 1) * 2 * w],
        );
    }
    let mut out = Plane::new(2 * h, 2 * w);
    let mut col = vec![0.0; h];
    let mut col2 = vec![0.0; 2 * h];
    for c in 0..2 * w {
        for r in 0..h {
            col[r] = wide.get(r, c);
        }
        upsample_1d(&col, &mut col2);
        for r in 0..2 * h {
            out.set(r, c, col2[r]);
        }
    }
    out
}
