//! Turning a [`QuantizedImage`] into network inputs and the coefficient-level
//! skip the network's residual is added to.

use dctx_core::blockdct::{chroma_upsample, decoded_samples, dequantized_plane, forward_dct_plane, inverse_dct_plane};
use dctx_core::collocate::{embed_component, inverse_rearrange, rearrange, raw_component};
use dctx_core::{CollocatedMap, ComponentKind, Plane, QuantMatrix, QuantizedImage, Subsampling};

use crate::{Ablation, ModelConfig, NetError, Result};

/// Network inputs are coefficients divided by this; its residual output is
/// multiplied by it.
pub const COEFF_SCALE: f64 = 1024.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelInput {
    /// Per component (channels, h, w) channel-major, scaled, padded to a
    /// multiple of the window size.
    pub maps: Vec<Vec<f64>>,
    pub map_dims: Vec<(usize, usize)>,
    pub channels: usize,
    /// Luma block grid before window padding; the output grid.
    pub grid: (usize, usize),
    /// Luma block grid after window padding.
    pub padded: (usize, usize),
    /// (components · 64, grid) channel-major coefficient skip in coefficient
    /// units; every component at luma resolution.
    pub skip: Vec<f64>,
    pub qms: Vec<QuantMatrix>,
    pub subsampling: Subsampling,
    pub pixel_dims: (usize, usize),
}

impl ModelInput {
    pub fn components(&self) -> usize {
        self.maps.len()
    }
}

/// Edge-replicating pad of a channel-major (c, h, w) stack to (c, ph, pw).
pub fn pad_maps(data: &[f64], c: usize, (h, w): (usize, usize), (ph, pw): (usize, usize)) -> Vec<f64> {
    let mut out = Vec::with_capacity(c * ph * pw);
    for k in 0..c {
        for i in 0..ph {
            let row = &data[(k * h + i.min(h - 1)) * w..][..w];
            out.extend((0..pw).map(|j| row[j.min(w - 1)]));
        }
    }
    out
}

/// Nearest-neighbour x2 in both grid axes.
fn replicate2(data: &[f64], c: usize, (h, w): (usize, usize)) -> Vec<f64> {
    let (oh, ow) = (2 * h, 2 * w);
    let mut out = Vec::with_capacity(c * oh * ow);
    for k in 0..c {
        for i in 0..oh {
            out.extend((0..ow).map(|j| data[(k * h + i / 2) * w + j / 2]));
        }
    }
    out
}

pub fn check_compatible(img: &QuantizedImage, cfg: &ModelConfig) -> Result<()> {
    match (cfg.grayscale, img.is_gray()) {
        (true, false) => return Err(NetError::DimMismatch("grayscale model given a colour image".into())),
        (false, true) => return Err(NetError::DimMismatch("colour model given a grayscale image".into())),
        _ => {}
    }
    if !cfg.grayscale && img.subsampling != cfg.chroma {
        return Err(NetError::DimMismatch(format!(
            "model built for {} chroma, image is {}",
            cfg.chroma, img.subsampling
        )));
    }
    Ok(())
}

/// Decoded samples whose forward DCT is the skip: luma (and 4:4:4 chroma)
/// unclamped, 4:2:0 chroma clamped then bilinearly upsampled exactly as the
/// standard decoder does. Raw (table-free) variants use the raw integers.
pub fn base_samples(img: &QuantizedImage, ablation: Ablation) -> Vec<Plane> {
    let luma = (img.components[0].coeffs.height, img.components[0].coeffs.width);
    img.components
        .iter()
        .enumerate()
        .map(|(c, comp)| {
            let coeffs = if ablation.embeds_qm() {
                dequantized_plane(&comp.coeffs, img.qm(c))
            } else {
                let raw = comp.coeffs.data.iter().map(|&v| v as f64).collect();
                Plane::from_vec(comp.coeffs.height, comp.coeffs.width, raw)
            };
            if (coeffs.height, coeffs.width) == luma {
                inverse_dct_plane(&coeffs)
            } else if ablation.embeds_qm() {
                chroma_upsample(&decoded_samples(&coeffs))
            } else {
                let map = rearrange(&coeffs, ComponentKind::Chroma, img.qm(c)).expect("block-aligned plane");
                let (h, w) = map.plane_dims();
                let up = replicate2(&map.data, 64, (map.height, map.width));
                let map = CollocatedMap {
                    data: up,
                    height: 2 * map.height,
                    width: 2 * map.width,
                    ..map
                };
                debug_assert_eq!(map.plane_dims(), (2 * h, 2 * w));
                inverse_dct_plane(&inverse_rearrange(&map))
            }
        })
        .collect()
}

/// Full-resolution coefficients of the decoded JPEG as the network sees
/// them: the skip of a table-embedding model, i.e. what an untrained model
/// returns.
pub fn jpeg_coefficients(img: &QuantizedImage) -> Vec<Plane> {
    base_samples(img, Ablation::Full).iter().map(forward_dct_plane).collect()
}

pub fn prepare(img: &QuantizedImage, cfg: &ModelConfig) -> Result<ModelInput> {
    cfg.validate()?;
    check_compatible(img, cfg)?;
    img.validate().map_err(NetError::DimMismatch)?;
    let m = cfg.window_size;
    let n = img.components.len();
    let luma = (img.components[0].coeffs.height / 8, img.components[0].coeffs.width / 8);
    let padded = (luma.0.div_ceil(m) * m, luma.1.div_ceil(m) * m);
    let embed = cfg.ablation.embeds_qm();

    let mut maps = Vec::with_capacity(n);
    let mut map_dims = Vec::with_capacity(n);
    let mut qms = Vec::with_capacity(n);
    for c in 0..n {
        let map = if embed {
            embed_component(img, c)?
        } else {
            raw_component(img, c)?
        };
        let dims = (map.height, map.width);
        let target = if dims == luma {
            padded
        } else {
            (padded.0 / 2, padded.1 / 2)
        };
        let mut data: Vec<f64> = map.data.iter().map(|v| v / COEFF_SCALE).collect();
        if cfg.ablation == Ablation::ConcatQM {
            let qm = img.qm(c);
            for k in 0..64 {
                let q = qm.values[k] as f64 / COEFF_SCALE;
                data.extend(std::iter::repeat_n(q, dims.0 * dims.1));
            }
        }
        maps.push(pad_maps(&data, cfg.input_channels(), dims, target));
        map_dims.push(target);
        qms.push(img.qm(c).clone());
    }

    let mut skip = Vec::with_capacity(n * 64 * luma.0 * luma.1);
    for plane in base_samples(img, cfg.ablation) {
        let coeffs = forward_dct_plane(&plane);
        let map = rearrange(&coeffs, ComponentKind::Luma, &QuantMatrix::ones(ComponentKind::Luma))?;
        skip.extend_from_slice(&map.data);
    }

    Ok(ModelInput {
        maps,
        map_dims,
        channels: cfg.input_channels(),
        grid: luma,
        padded,
        skip,
        qms,
        subsampling: img.subsampling,
        pixel_dims: img.pixel_dims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dctx_core::blockdct::compress;
    use dctx_core::{ColorSpace, PixelImage};

    fn image(h: usize, w: usize) -> PixelImage {
        let planes = (0..3)
            .map(|k| Plane::from_fn(h, w, |r, c| ((r * 7 + c * 3 + k * 40) % 256) as f64))
            .collect();
        PixelImage::new(planes, ColorSpace::Rgb)
    }

    #[test]
    fn pad_replicates_edges() {
        let d = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(pad_maps(&d, 1, (2, 2), (3, 3)), vec![1.0, 2.0, 2.0, 3.0, 4.0, 4.0, 3.0, 4.0, 4.0]);
    }

    #[test]
    fn shapes_for_420_and_444() {
        let img = image(40, 24);
        for (sub, chroma_grid) in [(Subsampling::S420, (3, 2)), (Subsampling::S444, (6, 4))] {
            let q = compress(&img, 30, sub).unwrap();
            let cfg = ModelConfig {
                chroma: sub,
                ..ModelConfig::toy()
            };
            let inp = prepare(&q, &cfg).unwrap();
            let grid = if sub == Subsampling::S420 { (6, 4) } else { (5, 3) };
            assert_eq!(inp.grid, grid);
            assert_eq!(inp.padded, (6, 4));
            assert_eq!(inp.map_dims[1], chroma_grid);
            assert_eq!(inp.skip.len(), 3 * 64 * grid.0 * grid.1);
        }
    }

    #[test]
    fn embedded_luma_skip_is_dequantized() {
        let q = compress(&image(16, 16), 20, Subsampling::S420).unwrap();
        let inp = prepare(&q, &ModelConfig::toy()).unwrap();
        let e = embed_component(&q, 0).unwrap();
        for (a, b) in inp.skip[..e.data.len()].iter().zip(&e.data) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn incompatible_inputs_rejected() {
        let q = compress(&image(16, 16), 50, Subsampling::S444).unwrap();
        assert!(matches!(prepare(&q, &ModelConfig::toy()), Err(NetError::DimMismatch(_))));
        let gray = ModelConfig {
            grayscale: true,
            ..ModelConfig::toy()
        };
        assert!(prepare(&q, &gray).is_err());
    }
}
