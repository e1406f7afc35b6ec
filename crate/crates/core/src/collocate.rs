//! Quantization-matrix embedding and the collocated 64-channel layout.
//!
//! A block-layout plane of height H and width W becomes a map of shape
//! (64, H/8, W/8): channel `k = 8u + v` at grid site (i, j) holds frequency
//! (u, v) of block (i, j).

use thiserror::Error;

use crate::blockdct::{chroma_upsample, decoded_samples, forward_dct_plane, ComponentKind, QuantMatrix};
use crate::pixels::Plane;
use crate::quantized::{CoefficientPlane, QuantizedImage};
use crate::{BLOCK, BLOCK_AREA};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CollocateError {
    #[error("bad dimensions: {0}")]
    BadDims(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollocatedMap {
    /// Channel-major values, `data[(k * height + i) * width + j]`.
    pub data: Vec<f64>,
    /// Grid height (H / 8).
    pub height: usize,
    /// Grid width (W / 8).
    pub width: usize,
    pub kind: ComponentKind,
    pub qm: QuantMatrix,
}

impl CollocatedMap {
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.height + i) * self.width + j]
    }

    /// Pixel dims of the plane this map came from.
    pub fn plane_dims(&self) -> (usize, usize) {
        (self.height * BLOCK, self.width * BLOCK)
    }

    pub fn channel(&self, k: usize) -> Plane {
        let n = self.height * self.width;
        Plane::from_vec(self.height, self.width, self.data[k * n..(k + 1) * n].to_vec())
    }
}

fn check_dims(h: usize, w: usize) -> Result<(), CollocateError> {
    if h % BLOCK != 0 || w % BLOCK != 0 || h == 0 || w == 0 {
        return Err(CollocateError::BadDims(format!("{h}x{w} is not a positive multiple of 8")));
    }
    Ok(())
}

/// Multiply each 8x8 block entrywise by `qm`.
pub fn qm_embed(plane: &CoefficientPlane, qm: &QuantMatrix) -> Result<Plane, CollocateError> {
    check_dims(plane.height, plane.width)?;
    Ok(Plane::from_fn(plane.height, plane.width, |r, c| {
        plane.get(r, c) as f64 * qm.at(r % BLOCK, c % BLOCK) as f64
    }))
}

pub fn rearrange(plane: &Plane, kind: ComponentKind, qm: &QuantMatrix) -> Result<CollocatedMap, CollocateError> {
    check_dims(plane.height, plane.width)?;
    let (gh, gw) = (plane.height / BLOCK, plane.width / BLOCK);
    let mut data = vec![0.0; BLOCK_AREA * gh * gw];
    for r in 0..plane.height {
        let (i, u) = (r / BLOCK, r % BLOCK);
        for c in 0..plane.width {
            let (j, v) = (c / BLOCK, c % BLOCK);
            data[((u * BLOCK + v) * gh + i) * gw + j] = plane.get(r, c);
        }
    }
    Ok(CollocatedMap {
        data,
        height: gh,
        width: gw,
        kind,
        qm: qm.clone(),
    })
}

pub fn inverse_rearrange(map: &CollocatedMap) -> Plane {
    Plane::from_fn(map.height * BLOCK, map.width * BLOCK, |r, c| {
        map.get((r % BLOCK) * BLOCK + c % BLOCK, r / BLOCK, c / BLOCK)
    })
}

/// Embedded (dequantized) collocated map of component `c`.
pub fn embed_component(img: &QuantizedImage, c: usize) -> Result<CollocatedMap, CollocateError> {
    let qm = img.qm(c);
    rearrange(&qm_embed(&img.components[c].coeffs, qm)?, qm.kind, qm)
}

/// Collocated map of the raw quantized integers of component `c`.
pub fn raw_component(img: &QuantizedImage, c: usize) -> Result<CollocatedMap, CollocateError> {
    let coeffs = &img.components[c].coeffs;
    let plane = Plane::from_vec(
        coeffs.height,
        coeffs.width,
        coeffs.data.iter().map(|&v| v as f64).collect(),
    );
    let qm = img.qm(c);
    rearrange(&plane, qm.kind, qm)
}

/// Bring a half-resolution chroma map to `target_dims` (pixel dims, twice
/// the source) through the pixel domain: inverse DCT, clamp to the 8-bit
/// range, bilinear x2, forward DCT.
pub fn chroma_dct_upsample(
    map: &CollocatedMap,
    target_dims: (usize, usize),
) -> Result<CollocatedMap, CollocateError> {
    let (h, w) = map.plane_dims();
    if target_dims != (2 * h, 2 * w) {
        return Err(CollocateError::BadDims(format!(
            "target {target_dims:?} is not twice the source {:?}",
            (h, w)
        )));
    }
    let samples = decoded_samples(&inverse_rearrange(map));
    let up = forward_dct_plane(&chroma_upsample(&samples));
    rearrange(&up, map.kind, &map.qm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockdct::{dequantize, qf_to_qm};

    fn noisy_plane(h: usize, w: usize, seed: usize) -> Plane {
        Plane::from_fn(h, w, |r, c| (((r * 131 + c * 71 + seed * 17) % 97) as f64) - 48.0)
    }

    #[test]
    fn channel_ten_example() {
        let mut p = Plane::new(16, 16);
        p.set(1, 8 + 2, 5.0);
        let m = rearrange(&p, ComponentKind::Luma, &QuantMatrix::ones(ComponentKind::Luma)).unwrap();
        assert_eq!(m.get(10, 0, 1), 5.0);
        assert_eq!(m.data.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn roundtrip_is_identity() {
        let qm = QuantMatrix::ones(ComponentKind::Chroma);
        for (h, w) in [(8, 8), (16, 24), (40, 8)] {
            let p = noisy_plane(h, w, h + w);
            let m = rearrange(&p, ComponentKind::Chroma, &qm).unwrap();
            assert_eq!((m.height, m.width), (h / 8, w / 8));
            assert_eq!(inverse_rearrange(&m), p);
        }
    }

    #[test]
    fn qm_blocks_spread_across_channels() {
        let qm = qf_to_qm(30, ComponentKind::Luma).unwrap();
        let p = Plane::from_fn(16, 24, |r, c| qm.at(r % 8, c % 8) as f64);
        let m = rearrange(&p, ComponentKind::Luma, &qm).unwrap();
        for k in 0..64 {
            assert!(m.channel(k).data.iter().all(|&v| v == qm.values[k] as f64));
        }
    }

    #[test]
    fn embed_matches_dequantize() {
        let qm = qf_to_qm(20, ComponentKind::Luma).unwrap();
        let mut plane = CoefficientPlane::zeros(16, 24);
        for (i, v) in plane.data.iter_mut().enumerate() {
            *v = ((i * 37) % 41) as i32 - 20;
        }
        let e = qm_embed(&plane, &qm).unwrap();
        for bi in 0..2 {
            for bj in 0..3 {
                let d = dequantize(&plane.block(bi, bj), &qm);
                for k in 0..64 {
                    assert_eq!(e.get(bi * 8 + k / 8, bj * 8 + k % 8), d[k]);
                }
            }
        }
        let mut ones = CoefficientPlane::zeros(8, 8);
        ones.data.iter_mut().for_each(|v| *v = 1);
        assert_eq!(
            qm_embed(&ones, &qm).unwrap().data,
            qm.values.iter().map(|&q| q as f64).collect::<Vec<_>>()
        );
        assert!(qm_embed(&CoefficientPlane::zeros(8, 16), &qm).unwrap().data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bad_dims_rejected() {
        let qm = QuantMatrix::ones(ComponentKind::Luma);
        assert!(rearrange(&Plane::new(12, 8), ComponentKind::Luma, &qm).is_err());
        let m = rearrange(&Plane::new(16, 16), ComponentKind::Luma, &qm).unwrap();
        assert!(matches!(chroma_dct_upsample(&m, (16, 16)), Err(CollocateError::BadDims(_))));
    }

    #[test]
    fn upsample_preserves_constant_dc() {
        let qm = QuantMatrix::ones(ComponentKind::Chroma);
        let mut p = Plane::new(16, 8);
        for bi in 0..2 {
            p.set(bi * 8, 0, 40.0);
        }
        let m = rearrange(&p, ComponentKind::Chroma, &qm).unwrap();
        let up = chroma_dct_upsample(&m, (32, 16)).unwrap();
        assert_eq!((up.height, up.width), (4, 2));
        for k in 0..64 {
            for v in up.channel(k).data {
                let want = if k == 0 { 40.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-9, "channel {k}: {v}");
            }
        }
    }

    #[test]
    fn upsample_is_composition_of_primitives() {
        let qm = QuantMatrix::ones(ComponentKind::Chroma);
        let p = noisy_plane(16, 24, 3).map(|v| v * 20.0);
        let m = rearrange(&p, ComponentKind::Chroma, &qm).unwrap();
        let got = inverse_rearrange(&chroma_dct_upsample(&m, (32, 48)).unwrap());
        let samples = crate::blockdct::inverse_dct_plane(&p).map(|v| v.clamp(0.0, 255.0));
        let want = forward_dct_plane(&chroma_upsample(&samples));
        for (a, b) in got.data.iter().zip(&want.data) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
