use dctx_autodiff::{self as ad, ParamSet, ParamStore, Real, Tensor};
use dctx_core::blockdct::{inverse_dct_plane, ycbcr_planes_to_image};
use dctx_core::collocate::{inverse_rearrange, rearrange};
use dctx_core::{CollocatedMap, ComponentKind, PixelImage, Plane, QuantMatrix, QuantizedImage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::input::{base_samples, prepare, ModelInput, COEFF_SCALE};
use crate::layers::{self, Registry};
use crate::{ModelConfig, Result};

/// Configuration plus its named parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ParamStore,
}

impl Model {
    /// Fresh model; the final coefficient projection starts at zero so the
    /// untrained model reproduces its input coefficients.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = Registry {
            store: &mut store,
            rng: &mut rng,
        };
        let c = config.embed_dim;
        layers::head_params(&mut r, &config)?;
        r.conv("shallow", c, c, 3)?;
        for i in 0..config.num_blocks {
            layers::block_params(&mut r, &format!("blocks.{i}"), &config)?;
        }
        r.zero_conv("proj", c, 64 * config.components(), 3)?;
        Ok(Model { config, params: store })
    }

    pub fn param_count(&self) -> usize {
        self.params.num_scalars()
    }

    /// Coefficient residual (components · 64, grid h, grid w) in coefficient
    /// units, to be added to `input.skip`.
    pub fn forward<T: Real>(&self, ps: &ParamSet<T>, input: &ModelInput) -> Result<Tensor<T>> {
        let cfg = &self.config;
        let maps = input
            .maps
            .iter()
            .zip(&input.map_dims)
            .map(|(m, &(h, w))| Tensor::new(&[input.channels, h, w], m.iter().map(|&v| T::c(v)).collect()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let aligned = layers::alignment_head(ps, cfg, &maps)?;
        let shallow = layers::conv(ps, "shallow", &aligned)?;
        let mut f = shallow.clone();
        for i in 0..cfg.num_blocks {
            f = layers::block(ps, &format!("blocks.{i}"), cfg, &f)?;
        }
        let feat = ad::add(&f, &shallow)?;
        let out = layers::conv(ps, "proj", &feat)?;
        let (gh, gw) = input.grid;
        let out = if input.padded != input.grid {
            ad::slice(&ad::slice(&out, 1, 0, gh)?, 2, 0, gw)?
        } else {
            out
        };
        Ok(ad::scale(&out, COEFF_SCALE))
    }

    /// Run the network on a JPEG's coefficients in single precision.
    pub fn recover(&self, img: &QuantizedImage) -> Result<Recovered> {
        let input = prepare(img, &self.config)?;
        let ps = self.params.snapshot::<f32>();
        let residual = self.forward(&ps, &input)?;
        let residual: Vec<f64> = residual.value().iter().map(|&v| v as f64).collect();
        Ok(Recovered::new(img, &self.config, &input, residual))
    }
}

/// Recovered full-resolution coefficients of every component.
#[derive(Clone, Debug, PartialEq)]
pub struct Recovered {
    /// Block-layout coefficient planes at luma resolution.
    pub coefficients: Vec<Plane>,
    /// Pixel image: decoded samples plus the inverse transform of the
    /// residual, clamped, colour converted, cropped.
    pub image: PixelImage,
}

fn unrearrange(data: &[f64], (h, w): (usize, usize)) -> Plane {
    let ones = QuantMatrix::ones(ComponentKind::Luma);
    inverse_rearrange(&CollocatedMap {
        data: data.to_vec(),
        height: h,
        width: w,
        kind: ComponentKind::Luma,
        qm: ones,
    })
}

impl Recovered {
    pub fn new(img: &QuantizedImage, cfg: &ModelConfig, input: &ModelInput, residual: Vec<f64>) -> Self {
        let per = 64 * input.grid.0 * input.grid.1;
        let base = base_samples(img, cfg.ablation);
        let mut coefficients = Vec::with_capacity(base.len());
        let mut samples = Vec::with_capacity(base.len());
        for (c, b) in base.into_iter().enumerate() {
            let skip = &input.skip[c * per..(c + 1) * per];
            let res = &residual[c * per..(c + 1) * per];
            let total: Vec<f64> = skip.iter().zip(res).map(|(a, r)| a + r).collect();
            coefficients.push(unrearrange(&total, input.grid));
            let delta = inverse_dct_plane(&unrearrange(res, input.grid));
            let s = Plane::from_fn(b.height, b.width, |i, j| {
                (b.get(i, j) + (delta.get(i, j) - 128.0)).clamp(0.0, 255.0)
            });
            samples.push(s);
        }
        Recovered {
            coefficients,
            image: ycbcr_planes_to_image(&samples, input.pixel_dims),
        }
    }

    /// Recovered coefficients of one component as a collocated map.
    pub fn map(&self, component: usize) -> CollocatedMap {
        rearrange(
            &self.coefficients[component],
            ComponentKind::Luma,
            &QuantMatrix::ones(ComponentKind::Luma),
        )
        .expect("block-aligned plane")
    }
}
