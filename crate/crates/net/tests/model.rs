mod common;

use dctx_autodiff::gradcheck::{check, check_with_step};
use dctx_autodiff::{Tensor, self as ad};
use dctx_core::blockdct::{compress, decompress};
use dctx_core::Subsampling;
use dctx_net::layers::{alignment_head, sftb};
use dctx_net::loss::LossConfig;
use dctx_net::train::collocated_stack;
use dctx_net::{dual_loss, prepare, COEFF_SCALE, Ablation, Model, ModelConfig, ABLATIONS};
use dctx_core::blockdct::lossless_coefficients;

use common::{gray_pattern, noise, pattern, randomize, small_config};

const GRAD_TOL: f64 = 1e-4;
const FLOOR: f64 = 1e-3;
/// Difference step for whole-model checks.
const MODEL_STEP: f64 = 1e-3;

#[test]
fn untrained_model_reproduces_decoder_output() {
    for sub in [Subsampling::S420, Subsampling::S444] {
        for ablation in [Ablation::Full, Ablation::ConcatNoConv, Ablation::Successive] {
            let cfg = ModelConfig {
                chroma: sub,
                ..ModelConfig::toy().with_ablation(ablation)
            };
            let model = Model::new(cfg, 11).unwrap();
            let q = compress(&pattern(40, 56, 2), 15, sub).unwrap();
            let rec = model.recover(&q).unwrap();
            assert_eq!(rec.image, decompress(&q), "{sub} {ablation}");
        }
    }
    let gray = ModelConfig {
        grayscale: true,
        ..ModelConfig::toy()
    };
    let q = compress(&gray_pattern(24, 40, 3), 30, Subsampling::S444).unwrap();
    assert_eq!(Model::new(gray, 1).unwrap().recover(&q).unwrap().image, decompress(&q));
}

#[test]
fn untrained_model_returns_input_coefficients() {
    let model = Model::new(ModelConfig::toy(), 4).unwrap();
    let q = compress(&pattern(32, 32, 5), 40, Subsampling::S420).unwrap();
    let input = prepare(&q, &model.config).unwrap();
    let rec = model.recover(&q).unwrap();
    assert_eq!(collocated_stack(&rec.coefficients).unwrap(), input.skip);
}

#[test]
fn every_ablation_runs_and_keeps_shape() {
    let q = compress(&pattern(24, 40, 6), 20, Subsampling::S420).unwrap();
    let mut counts = Vec::new();
    for a in ABLATIONS {
        let mut model = Model::new(small_config().with_ablation(a), 2).unwrap();
        randomize(&mut model, 9, 0.05);
        let input = prepare(&q, &model.config).unwrap();
        let out = model.forward(&model.params.snapshot::<f32>(), &input).unwrap();
        // 4:2:0 coefficient planes are padded to whole 16x16 units.
        assert_eq!(out.shape(), &[192, 4, 6], "{a}");
        assert!(out.value().iter().all(|v| v.is_finite()), "{a}");
        let rec = model.recover(&q).unwrap();
        assert_eq!(rec.image.dims(), (24, 40));
        counts.push((a, model.param_count()));
    }
    let n = |a| counts.iter().find(|(b, _)| *b == a).unwrap().1;
    let (c, k) = (12, 2);
    // 2C -> C 3x3 fusion replaced by C -> C, by 1x1, or removed.
    assert_eq!(n(Ablation::Full) - n(Ablation::AddFusion), k * (2 * 9 * c * c - 9 * c * c));
    assert_eq!(n(Ablation::Full) - n(Ablation::ConcatNoConv), k * (2 * 9 * c * c - 2 * c * c));
    assert_eq!(n(Ablation::Full) - n(Ablation::Successive), k * (2 * 9 * c * c + c));
    assert_eq!(n(Ablation::ConcatQM) - n(Ablation::Full), 3 * 64 * 9 * c);
    assert_eq!(n(Ablation::NoQM), n(Ablation::Full));
}

/// Closed-form parameter count of a colour 4:2:0 model.
fn expected_params(cfg: &ModelConfig) -> usize {
    let c = cfg.embed_dim;
    let cin = cfg.input_channels();
    let conv = |i: usize, o: usize, k: usize| i * o * k * k + o;
    let linear = |i: usize, o: usize| i * o + o;
    let heads = cfg.heads();
    let m = cfg.window_size;
    let head = 3 * conv(cin, c, 3) + 2 * (c * c * 4 + c) + conv(3 * c, c, 3);
    let common = 4 * c + linear(c, 3 * c) + linear(c, c) + linear(c, cfg.mlp_ratio * c) + linear(cfg.mlp_ratio * c, c);
    let spatial = common + (2 * m - 1).pow(2) * heads;
    let freq = common + 2 * (9 * c + c);
    let sftb = spatial + freq + conv(2 * c, c, 3);
    let blocks = cfg.num_blocks * (cfg.sftbs_per_block * sftb + conv(c, c, 3));
    head + conv(c, c, 3) + blocks + conv(c, 64 * 3, 3)
}

#[test]
fn parameter_count() {
    for cfg in [ModelConfig::default(), ModelConfig::toy(), small_config()] {
        assert_eq!(Model::new(cfg.clone(), 0).unwrap().param_count(), expected_params(&cfg));
    }
    assert_eq!(Model::new(ModelConfig::default(), 0).unwrap().param_count(), 7_338_000);
}

#[test]
fn construction_is_seeded() {
    let a = Model::new(ModelConfig::toy(), 5).unwrap();
    assert_eq!(a, Model::new(ModelConfig::toy(), 5).unwrap());
    assert_ne!(a, Model::new(ModelConfig::toy(), 6).unwrap());
}

fn param_inputs(model: &Model) -> Vec<(Vec<usize>, Vec<f64>)> {
    model
        .params
        .iter()
        .map(|p| (p.shape.clone(), p.value.iter().map(|&v| v as f64).collect()))
        .collect()
}

#[test]
fn sftb_gradients() {
    for a in [Ablation::Full, Ablation::AddFusion, Ablation::ConcatNoConv, Ablation::Successive, Ablation::ParallelSpatial] {
        let mut model = Model::new(small_config().with_ablation(a), 1).unwrap();
        randomize(&mut model, 2, 0.3);
        let np = model.params.len();
        let mut inputs = param_inputs(&model);
        inputs.push((vec![12, 8, 8], noise(12 * 64, 3)));
        let f = |ts: &[Tensor<f64>]| {
            let ps = model.params.bind(ts[..np].to_vec()).unwrap();
            Ok(sftb(&ps, "blocks.0.sftb1", &model.config, &ts[np], 1).unwrap())
        };
        let r = check(f, &inputs, 3, FLOOR).unwrap();
        assert!(r.max_rel < GRAD_TOL, "{a}: {r:?}");
    }
}

#[test]
fn head_gradients() {
    for (sub, gray) in [(Subsampling::S420, false), (Subsampling::S444, false), (Subsampling::S444, true)] {
        let cfg = ModelConfig {
            chroma: sub,
            grayscale: gray,
            ..small_config()
        };
        let mut model = Model::new(cfg, 1).unwrap();
        randomize(&mut model, 4, 0.3);
        let np = model.params.len();
        let mut inputs = param_inputs(&model);
        let (h, w) = (4, 8);
        let ch = if sub == Subsampling::S420 { (2, 4) } else { (4, 8) };
        inputs.push((vec![64, h, w], noise(64 * h * w, 5)));
        if !gray {
            inputs.push((vec![64, ch.0, ch.1], noise(64 * ch.0 * ch.1, 6)));
            inputs.push((vec![64, ch.0, ch.1], noise(64 * ch.0 * ch.1, 7)));
        }
        let f = |ts: &[Tensor<f64>]| {
            let ps = model.params.bind(ts[..np].to_vec()).unwrap();
            Ok(alignment_head(&ps, &model.config, &ts[np..]).unwrap())
        };
        let r = check(f, &inputs, 4, FLOOR).unwrap();
        assert!(r.max_rel < GRAD_TOL, "{sub} gray={gray}: {r:?}");
    }
}

#[test]
fn full_model_gradients() {
    for a in ABLATIONS {
        let cfg = ModelConfig {
            num_blocks: 2,
            ..small_config().with_ablation(a)
        };
        let mut model = Model::new(cfg, 8).unwrap();
        randomize(&mut model, 9, 0.2);
        let q = compress(&pattern(16, 16, 1), 25, Subsampling::S420).unwrap();
        let input = prepare(&q, &model.config).unwrap();
        // In network units; the coefficient scale only amplifies round-off.
        let f = |ts: &[Tensor<f64>]| {
            let out = model.forward(&model.params.bind(ts.to_vec()).unwrap(), &input).unwrap();
            Ok(ad::scale(&out, 1.0 / COEFF_SCALE))
        };
        let r = check_with_step(f, &param_inputs(&model), 2, FLOOR, MODEL_STEP).unwrap();
        assert!(r.max_rel < GRAD_TOL, "{a}: {r:?}");
    }
}

/// Through the pixel term of the objective, with a Charbonnier epsilon wide
/// enough that central differences do not straddle its near-kink.
#[test]
fn full_model_loss_gradients() {
    let cfg = ModelConfig {
        num_blocks: 2,
        ..small_config()
    };
    let mut model = Model::new(cfg, 8).unwrap();
    randomize(&mut model, 9, 0.05);
    let img = pattern(32, 24, 1);
    let q = compress(&img, 25, Subsampling::S420).unwrap();
    let input = prepare(&q, &model.config).unwrap();
    let target = collocated_stack(&lossless_coefficients(&img, Subsampling::S420).unwrap()).unwrap();
    let shape = [192, input.grid.0, input.grid.1];
    let np = model.params.len();
    let f = |ts: &[Tensor<f64>]| {
        let ps = model.params.bind(ts.to_vec()).unwrap();
        let res = model.forward(&ps, &input).unwrap();
        let rec = ad::add(&res, &Tensor::new(&shape, input.skip.clone()).unwrap()).unwrap();
        let cfg = LossConfig {
            lambda: 255.0,
            eps: 0.05,
            domain: dctx_net::LossDomain::Dual,
        };
        let pix = dual_loss(&Tensor::new(&shape, target.clone()).unwrap(), &rec, &cfg).unwrap();
        let freq = dual_loss(
            &Tensor::new(&shape, target.clone()).unwrap(),
            &rec,
            &LossConfig { lambda: 0.0, ..cfg },
        )
        .unwrap();
        Ok(ad::sub(&pix, &freq).unwrap())
    };
    let r = check(f, &param_inputs(&model), 2, FLOOR).unwrap();
    assert!(r.checked >= np, "{r:?}");
    assert!(r.max_rel < GRAD_TOL, "{r:?}");
}

#[test]
fn every_parameter_receives_gradient() {
    let q = compress(&pattern(32, 32, 8), 20, Subsampling::S420).unwrap();
    for a in ABLATIONS {
        let mut model = Model::new(small_config().with_ablation(a), 3).unwrap();
        randomize(&mut model, 4, 0.2);
        let input = prepare(&q, &model.config).unwrap();
        let ps = model.params.snapshot::<f64>();
        let out = model.forward(&ps, &input).unwrap();
        ad::sum(&ad::square(&out)).backward().unwrap();
        for (p, g) in model.params.iter().zip(ps.grads()) {
            assert!(g.iter().any(|&v| v != 0.0), "{a}: {} gets no gradient", p.name);
        }
    }
}

#[test]
fn incompatible_image_is_an_error() {
    let model = Model::new(ModelConfig::toy(), 0).unwrap();
    let q = compress(&pattern(16, 16, 0), 50, Subsampling::S444).unwrap();
    assert!(model.recover(&q).is_err());
}
