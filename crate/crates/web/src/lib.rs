//! WebAssembly bindings behind `www/index.html`. Images cross the boundary
//! as RGBA bytes, as a canvas hands them out.

use dctx_core::blockdct::{compress, decompress, lossless_coefficients};
use dctx_core::collocate::{embed_component, inverse_rearrange, raw_component};
use dctx_core::jfif::encode_jpeg;
use dctx_core::metrics::{bhattacharyya, dct_histograms, js_divergence, psnr, psnr_b, ssim, DEFAULT_BINS};
use dctx_core::{ColorSpace, PixelImage, Plane, QuantizedImage, Subsampling};
use wasm_bindgen::prelude::*;

fn from_rgba(rgba: &[u8], width: u32, height: u32) -> Result<PixelImage, String> {
    let (w, h) = (width as usize, height as usize);
    if w == 0 || h == 0 || rgba.len() != w * h * 4 {
        return Err(format!("expected {}x{} RGBA pixels, got {} bytes", w, h, rgba.len()));
    }
    let rgb: Vec<u8> = rgba.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect();
    Ok(PixelImage::from_interleaved_u8(h, w, ColorSpace::Rgb, &rgb))
}

fn to_rgba(img: &PixelImage) -> Vec<u8> {
    let n = img.planes.len();
    img.to_interleaved_u8()
        .chunks_exact(n)
        .flat_map(|p| if n == 1 { [p[0], p[0], p[0], 255] } else { [p[0], p[1], p[2], 255] })
        .collect()
}

fn parse_subsampling(s: &str) -> Result<Subsampling, String> {
    s.parse()
}

/// Min-max stretch onto gray RGBA.
fn plane_rgba(p: &Plane) -> Vec<u8> {
    let (lo, hi) = p.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    p.data
        .iter()
        .flat_map(|&v| {
            let g = ((v - lo) / span * 255.0).round() as u8;
            [g, g, g, 255]
        })
        .collect()
}

/// Quality of one compression against its source.
#[wasm_bindgen]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scores {
    pub qf: u32,
    pub bytes: u32,
    /// Fraction of zero quantized coefficients.
    pub sparsity: f64,
    pub psnr: f64,
    pub ssim: f64,
    pub psnr_b: f64,
    /// Mean per-frequency divergences between lossless and dequantized luma
    /// coefficients.
    pub js: f64,
    pub bha: f64,
}

fn score(src: &PixelImage, q: &QuantizedImage, qf: u32, bytes: usize) -> Result<Scores, String> {
    let dec = decompress(q);
    let e = |e: dctx_core::metrics::MetricsError| e.to_string();
    let lossless = lossless_coefficients(src, q.subsampling).map_err(|e| e.to_string())?;
    let jpeg = inverse_rearrange(&embed_component(q, 0).map_err(|e| e.to_string())?);
    let hl = dct_histograms(&lossless[..1], DEFAULT_BINS).map_err(e)?;
    let hj = dct_histograms(&[jpeg], DEFAULT_BINS).map_err(e)?;
    let (zeros, total) = q.components.iter().fold((0, 0), |(z, t), c| {
        (z + c.coeffs.data.iter().filter(|&&v| v == 0).count(), t + c.coeffs.data.len())
    });
    Ok(Scores {
        qf,
        bytes: bytes as u32,
        sparsity: zeros as f64 / total as f64,
        psnr: psnr(src, &dec).map_err(e)?,
        ssim: ssim(src, &dec).map_err(e)?,
        psnr_b: psnr_b(src, &dec).map_err(e)?,
        js: js_divergence(&hl, &hj).map_err(e)?,
        bha: bhattacharyya(&hl, &hj).map_err(e)?,
    })
}

/// A compressed image kept around for inspection.
#[wasm_bindgen]
pub struct Degraded {
    q: QuantizedImage,
    jpeg: Vec<u8>,
    decoded: PixelImage,
    scores: Scores,
}

#[wasm_bindgen]
impl Degraded {
    /// Baseline JFIF file.
    pub fn jpeg(&self) -> Vec<u8> {
        self.jpeg.clone()
    }

    /// Standard decode as RGBA.
    pub fn rgba(&self) -> Vec<u8> {
        to_rgba(&self.decoded)
    }

    pub fn scores(&self) -> Scores {
        self.scores
    }

    /// Collocated grid size of the luma component, `[rows, cols]`.
    pub fn grid(&self) -> Vec<u32> {
        let c = &self.q.components[0].coeffs;
        vec![c.blocks_high() as u32, c.blocks_wide() as u32]
    }

    /// Luma frequency `k = 8u + v` over all blocks as gray RGBA of
    /// [`Self::grid`] size. `embedded` multiplies by the quantization table.
    pub fn channel(&self, k: u32, embedded: bool) -> Result<Vec<u8>, String> {
        if k >= 64 {
            return Err(format!("frequency {k} out of range 0..64"));
        }
        let map = if embedded { embed_component(&self.q, 0) } else { raw_component(&self.q, 0) };
        Ok(plane_rgba(&map.map_err(|e| e.to_string())?.channel(k as usize)))
    }

    /// Share of zero luma coefficients per frequency, 64 values row-major.
    pub fn zero_rates(&self) -> Vec<f64> {
        let c = &self.q.components[0].coeffs;
        let blocks = (c.blocks_high() * c.blocks_wide()) as f64;
        let mut zeros = vec![0.0; 64];
        for bi in 0..c.blocks_high() {
            for bj in 0..c.blocks_wide() {
                for (k, &v) in c.block(bi, bj).iter().enumerate() {
                    if v == 0 {
                        zeros[k] += 1.0;
                    }
                }
            }
        }
        zeros.iter().map(|z| z / blocks).collect()
    }
}

/// Compress an RGBA image at `qf` with `subsampling` ("420" or "444").
#[wasm_bindgen]
pub fn degrade(rgba: &[u8], width: u32, height: u32, qf: u32, subsampling: &str) -> Result<Degraded, String> {
    let src = from_rgba(rgba, width, height)?;
    let q = compress(&src, qf, parse_subsampling(subsampling)?).map_err(|e| e.to_string())?;
    let jpeg = encode_jpeg(&q).map_err(|e| e.to_string())?;
    let scores = score(&src, &q, qf, jpeg.len())?;
    Ok(Degraded { decoded: decompress(&q), q, jpeg, scores })
}

/// Scores at each quality factor in `qfs`.
#[wasm_bindgen]
pub fn sweep(rgba: &[u8], width: u32, height: u32, qfs: &[u32], subsampling: &str) -> Result<Vec<Scores>, String> {
    let src = from_rgba(rgba, width, height)?;
    let sub = parse_subsampling(subsampling)?;
    qfs.iter()
        .map(|&qf| {
            let q = compress(&src, qf, sub).map_err(|e| e.to_string())?;
            score(&src, &q, qf, encode_jpeg(&q).map_err(|e| e.to_string())?.len())
        })
        .collect()
}
