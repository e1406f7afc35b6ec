#![allow(dead_code)]

pub mod dense;

use dctx_core::{ColorSpace, PixelImage, Plane};
use dctx_net::{Model, ModelConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Three heads of four channels, 4x4 windows, one block of two SFTBs.
pub fn small_config() -> ModelConfig {
    ModelConfig {
        embed_dim: 12,
        head_dim: 4,
        window_size: 4,
        num_blocks: 1,
        sftbs_per_block: 2,
        mlp_ratio: 2,
        ..ModelConfig::default()
    }
}

/// Replace every parameter with uniform noise in [-scale, scale] so that
/// zero-initialised projections do not hide anything.
pub fn randomize(model: &mut Model, seed: u64, scale: f32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in model.params.iter_mut() {
        for v in p.value.iter_mut() {
            *v = rng.random_range(-scale..=scale);
        }
    }
}

pub fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Smooth colour test pattern with some texture.
pub fn pattern(h: usize, w: usize, seed: u64) -> PixelImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..6.28)).collect();
    let planes = (0..3)
        .map(|k| {
            Plane::from_fn(h, w, |r, c| {
                let (y, x) = (r as f64, c as f64);
                let v = 128.0
                    + 70.0 * (0.11 * x + 0.07 * y + phase[k]).sin()
                    + 40.0 * (0.37 * x * (k as f64 + 1.0) / 3.0 - 0.23 * y + phase[k + 3]).cos();
                v.round().clamp(0.0, 255.0)
            })
        })
        .collect();
    PixelImage::new(planes, ColorSpace::Rgb)
}

pub fn gray_pattern(h: usize, w: usize, seed: u64) -> PixelImage {
    let c = pattern(h, w, seed);
    PixelImage::new(vec![c.planes[1].clone()], ColorSpace::Gray)
}
