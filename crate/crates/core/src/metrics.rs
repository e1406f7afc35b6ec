//! Pixel-domain (PSNR, SSIM, PSNR-B) and DCT-domain (per-frequency
//! histogram divergences) quality measures.

use std::io::Write;

use thiserror::Error;

use crate::blockdct::rgb_to_ycbcr_px;
use crate::pixels::{ColorSpace, PixelImage, Plane};
use crate::{BLOCK, BLOCK_AREA};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimMismatch((usize, usize, usize), (usize, usize, usize)),
    #[error("image {0}x{1} is smaller than the 11x11 SSIM window")]
    TooSmall(usize, usize),
    #[error("no coefficients to histogram")]
    EmptyInput,
    #[error("histogram layouts differ")]
    BinMismatch,
}

/// Which samples the PSNR-style metrics are computed on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MetricChannel {
    #[default]
    Rgb,
    Y,
}

impl std::str::FromStr for MetricChannel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rgb" => Ok(MetricChannel::Rgb),
            "y" | "luma" => Ok(MetricChannel::Y),
            other => Err(format!("unknown metric channel {other:?} (expected rgb or y)")),
        }
    }
}

fn check_dims(a: &PixelImage, b: &PixelImage) -> Result<(), MetricsError> {
    let da = (a.planes.len(), a.height(), a.width());
    let db = (b.planes.len(), b.height(), b.width());
    if da != db {
        return Err(MetricsError::DimMismatch(da, db));
    }
    Ok(())
}

/// Luma plane of an RGB image (unrounded); gray images pass through.
pub fn luma(img: &PixelImage) -> Plane {
    match img.colorspace {
        ColorSpace::Rgb => {
            let (h, w) = img.dims();
            let p = &img.planes;
            Plane::from_vec(
                h,
                w,
                (0..h * w).map(|i| rgb_to_ycbcr_px(p[0].data[i], p[1].data[i], p[2].data[i]).0).collect(),
            )
        }
        _ => img.planes[0].clone(),
    }
}

fn metric_planes(img: &PixelImage, channel: MetricChannel) -> Vec<Plane> {
    match (channel, img.colorspace) {
        (MetricChannel::Y, ColorSpace::Rgb) => vec![luma(img)],
        _ => img.planes.clone(),
    }
}

fn mse(a: &Plane, b: &Plane) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.data.len() as f64
}

fn to_db(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    }
}

/// PSNR in dB over all channels; identical images give `f64::INFINITY`.
pub fn psnr(a: &PixelImage, b: &PixelImage) -> Result<f64, MetricsError> {
    psnr_on(a, b, MetricChannel::Rgb)
}

pub fn psnr_on(a: &PixelImage, b: &PixelImage, channel: MetricChannel) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let pa = metric_planes(a, channel);
    let pb = metric_planes(b, channel);
    let m = pa.iter().zip(&pb).map(|(x, y)| mse(x, y)).sum::<f64>() / pa.len() as f64;
    Ok(to_db(m))
}

fn gaussian_window() -> [f64; 11] {
    let mut g: [f64; 11] = std::array::from_fn(|i| {
        let x = i as f64 - 5.0;
        (-x * x / (2.0 * 1.5 * 1.5)).exp()
    });
    let s: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= s);
    g
}

/// Separable 11x11 Gaussian filter, valid region only.
fn filter_valid(p: &Plane, g: &[f64; 11]) -> Plane {
    let (h, w) = (p.height, p.width);
    let rows = Plane::from_fn(h, w - 10, |r, c| (0..11).map(|k| g[k] * p.get(r, c + k)).sum());
    Plane::from_fn(h - 10, w - 10, |r, c| (0..11).map(|k| g[k] * rows.get(r + k, c)).sum())
}

/// Mean SSIM on the luma channel.
pub fn ssim(a: &PixelImage, b: &PixelImage) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let (h, w) = a.dims();
    if h < 11 || w < 11 {
        return Err(MetricsError::TooSmall(h, w));
    }
    Ok(ssim_plane(&luma(a), &luma(b)))
}

fn ssim_plane(x: &Plane, y: &Plane) -> f64 {
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let g = gaussian_window();
    let mx = filter_valid(x, &g);
    let my = filter_valid(y, &g);
    let xx = filter_valid(&x.map(|v| v * v), &g);
    let yy = filter_valid(&y.map(|v| v * v), &g);
    let xy = filter_valid(
        &Plane::from_vec(x.height, x.width, x.data.iter().zip(&y.data).map(|(p, q)| p * q).collect()),
        &g,
    );
    let n = mx.data.len();
    let mut total = 0.0;
    for i in 0..n {
        let (ux, uy) = (mx.data[i], my.data[i]);
        let vx = xx.data[i] - ux * ux;
        let vy = yy.data[i] - uy * uy;
        let cxy = xy.data[i] - ux * uy;
        total += ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
    }
    total / n as f64
}

/// Blocking effect factor of a single plane (8-pixel grid).
pub fn blocking_effect_factor(p: &Plane) -> f64 {
    let (h, w) = (p.height, p.width);
    let (mut sum_b, mut sum_bc) = (0.0, 0.0);
    let (mut n_b, mut n_bc) = (0usize, 0usize);
    for r in 0..h {
        for c in 0..w {
            let v = p.get(r, c);
            if c + 1 < w {
                let d = (v - p.get(r, c + 1)).powi(2);
                if (c + 1) % BLOCK == 0 {
                    sum_b += d;
                    n_b += 1;
                } else {
                    sum_bc += d;
                    n_bc += 1;
                }
            }
            if r + 1 < h {
                let d = (v - p.get(r + 1, c)).powi(2);
                if (r + 1) % BLOCK == 0 {
                    sum_b += d;
                    n_b += 1;
                } else {
                    sum_bc += d;
                    n_bc += 1;
                }
            }
        }
    }
    if n_b == 0 || n_bc == 0 {
        return 0.0;
    }
    let db = sum_b / n_b as f64;
    let dbc = sum_bc / n_bc as f64;
    let eta = (BLOCK as f64).log2() / (h.min(w) as f64).log2();
    (eta * (db - dbc)).max(0.0)
}

/// PSNR-B: MSE plus the blocking effect factor of `test`.
pub fn psnr_b(reference: &PixelImage, test: &PixelImage) -> Result<f64, MetricsError> {
    psnr_b_on(reference, test, MetricChannel::Rgb)
}

pub fn psnr_b_on(reference: &PixelImage, test: &PixelImage, channel: MetricChannel) -> Result<f64, MetricsError> {
    check_dims(reference, test)?;
    let pr = metric_planes(reference, channel);
    let pt = metric_planes(test, channel);
    let m = pr
        .iter()
        .zip(&pt)
        .map(|(r, t)| mse(r, t) + blocking_effect_factor(t))
        .sum::<f64>()
        / pr.len() as f64;
    Ok(to_db(m))
}

/// Per-frequency normalized histograms over shared bins.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramSet {
    pub lo: f64,
    pub hi: f64,
    /// `probs[c]` is the distribution of frequency c = 8u + v.
    pub probs: Vec<Vec<f64>>,
}

impl HistogramSet {
    pub fn bins(&self) -> usize {
        self.probs[0].len()
    }
}

pub const HIST_LO: f64 = -1024.0;
pub const HIST_HI: f64 = 1024.0;
pub const DEFAULT_BINS: usize = 256;

/// Histogram every frequency of block-layout coefficient planes into
/// `n_bins` equal bins over [-1024, 1024); out-of-range values land in the
/// edge bins.
pub fn dct_histograms(planes: &[Plane], n_bins: usize) -> Result<HistogramSet, MetricsError> {
    assert!(n_bins >= 2, "need at least two bins");
    let width = (HIST_HI - HIST_LO) / n_bins as f64;
    let mut counts = vec![vec![0u64; n_bins]; BLOCK_AREA];
    for p in planes {
        for r in 0..p.height {
            for c in 0..p.width {
                let f = (r % BLOCK) * BLOCK + c % BLOCK;
                let bin = ((p.get(r, c) - HIST_LO) / width).floor().clamp(0.0, (n_bins - 1) as f64) as usize;
                counts[f][bin] += 1;
            }
        }
    }
    let total: u64 = counts[0].iter().sum();
    if total == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let probs = counts
        .into_iter()
        .map(|c| {
            let n: u64 = c.iter().sum();
            c.into_iter().map(|k| k as f64 / n as f64).collect()
        })
        .collect();
    Ok(HistogramSet { lo: HIST_LO, hi: HIST_HI, probs })
}

fn check_bins(x: &HistogramSet, y: &HistogramSet) -> Result<(), MetricsError> {
    if x.lo != y.lo || x.hi != y.hi || x.probs.len() != y.probs.len() || x.bins() != y.bins() {
        return Err(MetricsError::BinMismatch);
    }
    Ok(())
}

fn kl_term(p: f64, m: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * (p / m).ln()
    }
}

/// Mean over frequencies of the Jensen-Shannon divergence (natural log).
pub fn js_divergence(x: &HistogramSet, y: &HistogramSet) -> Result<f64, MetricsError> {
    check_bins(x, y)?;
    let total: f64 = x
        .probs
        .iter()
        .zip(&y.probs)
        .map(|(p, q)| {
            p.iter()
                .zip(q)
                .map(|(&a, &b)| {
                    let m = 0.5 * (a + b);
                    0.5 * (kl_term(a, m) + kl_term(b, m))
                })
                .sum::<f64>()
        })
        .sum();
    Ok(total / x.probs.len() as f64)
}

pub const BHATTACHARYYA_FLOOR: f64 = 1e-12;

/// Mean over frequencies of -ln(sum_i sqrt(p_i q_i)).
pub fn bhattacharyya(x: &HistogramSet, y: &HistogramSet) -> Result<f64, MetricsError> {
    check_bins(x, y)?;
    let total: f64 = x
        .probs
        .iter()
        .zip(&y.probs)
        .map(|(p, q)| {
            let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
            // rounding can push bc a hair above 1
            (-bc.max(BHATTACHARYYA_FLOOR).ln()).max(0.0)
        })
        .sum();
    Ok(total / x.probs.len() as f64)
}

/// One evaluation row.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub image: String,
    pub qf: u32,
    pub method: String,
    pub psnr: f64,
    pub ssim: f64,
    pub psnr_b: f64,
    pub js: f64,
    pub bha: f64,
}

impl MetricsReport {
    /// Field-wise mean of `rows`, labelled `image`.
    pub fn mean(rows: &[MetricsReport], image: &str) -> Option<MetricsReport> {
        let first = rows.first()?;
        let n = rows.len() as f64;
        let avg = |f: fn(&MetricsReport) -> f64| rows.iter().map(f).sum::<f64>() / n;
        Some(MetricsReport {
            image: image.to_string(),
            qf: first.qf,
            method: first.method.clone(),
            psnr: avg(|r| r.psnr),
            ssim: avg(|r| r.ssim),
            psnr_b: avg(|r| r.psnr_b),
            js: avg(|r| r.js),
            bha: avg(|r| r.bha),
        })
    }
}

pub const CSV_HEADER: &str = "image,qf,method,psnr,ssim,psnr_b,js,bha";

fn fmt_num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.6}")
    }
}

pub fn write_csv<W: Write>(mut out: W, rows: &[MetricsReport]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.image,
            r.qf,
            r.method,
            fmt_num(r.psnr),
            fmt_num(r.ssim),
            fmt_num(r.psnr_b),
            fmt_num(r.js),
            fmt_num(r.bha)
        )?;
    }
    Ok(())
}
