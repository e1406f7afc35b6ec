use dctx_autodiff::{self as ad, adam_step, clip_grad_global_norm, AdamConfig, AdamState, Tensor};
use dctx_core::blockdct::{compress, degrade_double, lossless_coefficients, shift_image};
use dctx_core::collocate::rearrange;
use dctx_core::{ComponentKind, PixelImage, Plane, QuantMatrix, QuantizedImage, Subsampling};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::input::prepare;
use crate::loss::{dual_loss, LossConfig, LossDomain, CHARBONNIER_EPS, LAMBDA};
use crate::{kv, Model, NetError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub steps: u64,
    /// Full-scale runs use 96.
    pub batch: usize,
    /// Full-scale runs use 256.
    pub crop: usize,
    pub qf_min: u32,
    pub qf_max: u32,
    pub lr_start: f64,
    pub lr_peak: f64,
    pub lr_end: f64,
    pub warmup_fraction: f64,
    pub clip: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub double_jpeg: bool,
    pub lambda: f64,
    pub eps: f64,
    pub loss_domain: LossDomain,
    pub subsampling: Subsampling,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: 2000,
            batch: 8,
            crop: 64,
            qf_min: 10,
            qf_max: 100,
            lr_start: 1e-4,
            lr_peak: 4e-4,
            lr_end: 1e-5,
            warmup_fraction: 0.25,
            clip: 0.2,
            beta1: 0.9,
            beta2: 0.99,
            adam_eps: 1e-8,
            seed: 0,
            double_jpeg: false,
            lambda: LAMBDA,
            eps: CHARBONNIER_EPS,
            loss_domain: LossDomain::Dual,
            subsampling: Subsampling::S420,
        }
    }
}

impl TrainConfig {
    /// Double-compression fine-tuning: random (qf1, qf2) pairs and grid
    /// shifts, cosine decay from 5e-5 without warmup.
    pub fn fine_tune(self) -> Self {
        TrainConfig {
            double_jpeg: true,
            lr_start: 5e-5,
            lr_peak: 5e-5,
            warmup_fraction: 0.0,
            ..self
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
        }
    }

    pub fn loss(&self) -> LossConfig {
        LossConfig {
            lambda: self.lambda,
            eps: self.eps,
            domain: self.loss_domain,
        }
    }

    pub fn warmup_steps(&self) -> u64 {
        (self.warmup_fraction * self.steps as f64).floor() as u64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NetError::Config(m));
        if self.steps == 0 || self.batch == 0 {
            return bad("steps and batch must be positive".into());
        }
        if self.crop == 0 || self.crop % 16 != 0 {
            return bad(format!("crop {} must be a positive multiple of 16", self.crop));
        }
        if !(1..=100).contains(&self.qf_min) || !(self.qf_min..=100).contains(&self.qf_max) {
            return bad(format!("qf range {}..={} outside 1..=100", self.qf_min, self.qf_max));
        }
        if !(self.lr_end < self.lr_start && self.lr_start <= self.lr_peak) {
            return bad("learning rates must satisfy lr_end < lr_start <= lr_peak".into());
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return bad(format!("warmup_fraction {} outside [0, 1)", self.warmup_fraction));
        }
        if self.clip <= 0.0 || self.eps <= 0.0 || self.lambda < 0.0 {
            return bad("clip and eps must be positive, lambda non-negative".into());
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        format!(
            "steps = {}\nbatch = {}\ncrop = {}\nqf_min = {}\nqf_max = {}\nlr_start = {:e}\nlr_peak = {:e}\nlr_end = {:e}\nwarmup_fraction = {}\nclip = {}\nbeta1 = {}\nbeta2 = {}\nadam_eps = {:e}\nseed = {}\ndouble_jpeg = {}\nlambda = {}\neps = {:e}\nloss_domain = {}\nsubsampling = {}\n",
            self.steps,
            self.batch,
            self.crop,
            self.qf_min,
            self.qf_max,
            self.lr_start,
            self.lr_peak,
            self.lr_end,
            self.warmup_fraction,
            self.clip,
            self.beta1,
            self.beta2,
            self.adam_eps,
            self.seed,
            self.double_jpeg,
            self.lambda,
            self.eps,
            self.loss_domain,
            match self.subsampling {
                Subsampling::S420 => "420",
                Subsampling::S444 => "444",
            },
        )
    }

    /// Apply one key; returns false for keys that are not training keys.
    pub fn set(&mut self, key: &str, v: &str) -> Result<bool> {
        match key {
            "steps" => self.steps = kv::value(key, v)?,
            "batch" => self.batch = kv::value(key, v)?,
            "crop" => self.crop = kv::value(key, v)?,
            "qf_min" => self.qf_min = kv::value(key, v)?,
            "qf_max" => self.qf_max = kv::value(key, v)?,
            "qf" => {
                self.qf_min = kv::value(key, v)?;
                self.qf_max = self.qf_min;
            }
            "lr_start" => self.lr_start = kv::value(key, v)?,
            "lr_peak" => self.lr_peak = kv::value(key, v)?,
            "lr_end" => self.lr_end = kv::value(key, v)?,
            "warmup_fraction" => self.warmup_fraction = kv::value(key, v)?,
            "clip" => self.clip = kv::value(key, v)?,
            "beta1" => self.beta1 = kv::value(key, v)?,
            "beta2" => self.beta2 = kv::value(key, v)?,
            "adam_eps" => self.adam_eps = kv::value(key, v)?,
            "seed" => self.seed = kv::value(key, v)?,
            "double_jpeg" => self.double_jpeg = kv::bool_value(key, v)?,
            "lambda" => self.lambda = kv::value(key, v)?,
            "eps" => self.eps = kv::value(key, v)?,
            "loss_domain" => self.loss_domain = kv::value(key, v)?,
            "subsampling" => self.subsampling = kv::value(key, v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for (k, v) in kv::parse(text)? {
            if !cfg.set(&k, &v)? {
                return Err(NetError::Config(format!("unknown training key {k:?}")));
            }
        }
        Ok(cfg)
    }
}

/// Linear warmup from `lr_start` to `lr_peak` over the first
/// `warmup_fraction` of the run, then cosine decay reaching `lr_end` at the
/// last step.
pub fn lr_schedule(step: u64, cfg: &TrainConfig) -> Result<f64> {
    if step >= cfg.steps {
        return Err(NetError::StepOutOfRange { step, steps: cfg.steps });
    }
    let warm = cfg.warmup_steps();
    if step < warm {
        return Ok(cfg.lr_start + (cfg.lr_peak - cfg.lr_start) * step as f64 / warm as f64);
    }
    let span = cfg.steps - 1 - warm;
    let t = if span == 0 { 1.0 } else { (step - warm) as f64 / span as f64 };
    Ok(cfg.lr_end + 0.5 * (cfg.lr_peak - cfg.lr_end) * (1.0 + (std::f64::consts::PI * t).cos()))
}

/// One of the eight rotations/reflections of the square; `d & 3` quarter
/// turns clockwise, then a horizontal flip if `d & 4`.
pub fn dihedral(img: &PixelImage, d: u8) -> PixelImage {
    let planes = img
        .planes
        .iter()
        .map(|p| {
            let mut q = p.clone();
            for _ in 0..(d & 3) {
                q = Plane::from_fn(q.width, q.height, |r, c| q.get(q.height - 1 - c, r));
            }
            if d & 4 != 0 {
                q = Plane::from_fn(q.height, q.width, |r, c| q.get(r, q.width - 1 - c));
            }
            q
        })
        .collect();
    PixelImage::new(planes, img.colorspace)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub input: QuantizedImage,
    /// Unquantized coefficients of the (shifted) crop, block layout, every
    /// component at luma resolution.
    pub target: Vec<Plane>,
    pub qf: u32,
    /// First quality factor of a double compression.
    pub qf1: Option<u32>,
    pub shift: (usize, usize),
}

fn sample_one(corpus: &[PixelImage], cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<Sample> {
    let img = &corpus[rng.random_range(0..corpus.len())];
    let (h, w) = img.dims();
    if h < cfg.crop || w < cfg.crop {
        return Err(NetError::ImageTooSmall { h, w, crop: cfg.crop });
    }
    let top = rng.random_range(0..=h - cfg.crop);
    let left = rng.random_range(0..=w - cfg.crop);
    let d: u8 = rng.random_range(0..8);
    let crop = dihedral(&img.window(top, left, cfg.crop, cfg.crop), d);
    let qf = rng.random_range(cfg.qf_min..=cfg.qf_max);
    if cfg.double_jpeg {
        let qf1 = rng.random_range(cfg.qf_min..=cfg.qf_max);
        let shift = (4 * rng.random_range(0..2usize), 4 * rng.random_range(0..2usize));
        let input = degrade_double(&crop, qf1, qf, shift, cfg.subsampling)?;
        let target = lossless_coefficients(&shift_image(&crop, shift.0, shift.1), cfg.subsampling)?;
        Ok(Sample {
            input,
            target,
            qf,
            qf1: Some(qf1),
            shift,
        })
    } else {
        Ok(Sample {
            input: compress(&crop, qf, cfg.subsampling)?,
            target: lossless_coefficients(&crop, cfg.subsampling)?,
            qf,
            qf1: None,
            shift: (0, 0),
        })
    }
}

/// Random crops with dihedral augmentation, compressed at a random quality.
pub fn make_batch(corpus: &[PixelImage], cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Sample>> {
    if corpus.is_empty() {
        return Err(NetError::EmptyCorpus);
    }
    (0..cfg.batch).map(|_| sample_one(corpus, cfg, rng)).collect()
}

/// Block-layout planes to a (planes · 64, h/8, w/8) channel-major stack.
pub fn collocated_stack(planes: &[Plane]) -> Result<Vec<f64>> {
    let ones = QuantMatrix::ones(ComponentKind::Luma);
    let mut out = Vec::new();
    for p in planes {
        out.extend(rearrange(p, ComponentKind::Luma, &ones)?.data);
    }
    Ok(out)
}

/// Loss and parameter gradients of one sample, single precision.
pub fn sample_gradients(model: &Model, sample: &Sample, loss: &LossConfig) -> Result<(f64, Vec<Vec<f32>>)> {
    let input = prepare(&sample.input, &model.config)?;
    let (gh, gw) = input.grid;
    let shape = [input.components() * 64, gh, gw];
    let ps = model.params.snapshot::<f32>();
    let residual = model.forward(&ps, &input)?;
    let skip = Tensor::new(&shape, input.skip.iter().map(|&v| v as f32).collect())?;
    let recovered = ad::add(&residual, &skip)?;
    let target = collocated_stack(&sample.target)?;
    let target = Tensor::new(&shape, target.into_iter().map(|v| v as f32).collect())?;
    let l = dual_loss(&target, &recovered, loss)?;
    l.backward()?;
    Ok((l.item() as f64, ps.grads()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub step: u64,
    pub lr: f64,
    pub loss: f64,
    pub grad_norm: f64,
}

/// Model, optimizer state, step counter and data RNG of a training run.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub model: Model,
    pub cfg: TrainConfig,
    pub adam: AdamState,
    pub step: u64,
    pub rng: ChaCha8Rng,
}

impl Trainer {
    pub fn new(model: Model, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Trainer {
            adam: AdamState::new(&model.params),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            model,
            cfg,
            step: 0,
        })
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.cfg.steps
    }

    /// Mean loss and summed-then-averaged gradients over a batch; samples are
    /// combined in batch order so the result does not depend on threading.
    pub fn batch_gradients(&self, batch: &[Sample]) -> Result<(f64, Vec<Vec<f32>>)> {
        let loss_cfg = self.cfg.loss();
        #[cfg(feature = "parallel")]
        let per: Vec<Result<(f64, Vec<Vec<f32>>)>> = {
            use rayon::prelude::*;
            batch
                .par_iter()
                .map(|s| sample_gradients(&self.model, s, &loss_cfg))
                .collect()
        };
        #[cfg(not(feature = "parallel"))]
        let per = batch.iter().map(|s| sample_gradients(&self.model, s, &loss_cfg));
        let mut loss = 0.0;
        let mut grads: Option<Vec<Vec<f32>>> = None;
        for r in per {
            let (l, g) = r?;
            loss += l;
            match grads.as_mut() {
                None => grads = Some(g),
                Some(acc) => acc
                    .iter_mut()
                    .flatten()
                    .zip(g.iter().flatten())
                    .for_each(|(a, b)| *a += b),
            }
        }
        let n = batch.len() as f32;
        let mut grads = grads.unwrap_or_default();
        grads.iter_mut().flatten().for_each(|g| *g /= n);
        Ok((loss / batch.len() as f64, grads))
    }

    /// Draw a batch and take one optimizer step.
    pub fn train_step(&mut self, corpus: &[PixelImage]) -> Result<StepReport> {
        let lr = lr_schedule(self.step, &self.cfg)?;
        let batch = make_batch(corpus, &self.cfg, &mut self.rng)?;
        let (loss, mut grads) = self.batch_gradients(&batch)?;
        if !loss.is_finite() {
            return Err(NetError::NonFiniteLoss { step: self.step, loss });
        }
        let grad_norm = clip_grad_global_norm(&mut grads, self.cfg.clip);
        adam_step(&mut self.model.params, &grads, &mut self.adam, lr, &self.cfg.adam())?;
        let report = StepReport {
            step: self.step,
            lr,
            loss,
            grad_norm,
        };
        self.step += 1;
        Ok(report)
    }

    /// Train until the configured step count, reporting every step.
    pub fn run(&mut self, corpus: &[PixelImage], mut on_step: impl FnMut(&StepReport)) -> Result<Vec<StepReport>> {
        let mut trace = Vec::new();
        while !self.is_done() {
            let r = self.train_step(corpus)?;
            on_step(&r);
            trace.push(r);
        }
        Ok(trace)
    }
}
