mod common;

use dctx_core::blockdct::{dequantized_plane, lossless_coefficients};
use dctx_core::{ColorSpace, PixelImage, Plane};
use dctx_net::checkpoint::{Checkpoint, MAGIC};
use dctx_net::{
    load_checkpoint, lr_schedule, make_batch, save_checkpoint, Model, ModelConfig, NetError, TrainConfig, Trainer,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::pattern;

fn tiny_model() -> ModelConfig {
    ModelConfig {
        embed_dim: 8,
        head_dim: 4,
        num_blocks: 1,
        sftbs_per_block: 2,
        mlp_ratio: 2,
        ..ModelConfig::toy()
    }
}

fn tiny_train(steps: u64) -> TrainConfig {
    TrainConfig {
        steps,
        batch: 2,
        crop: 32,
        seed: 3,
        ..TrainConfig::default()
    }
}

fn corpus() -> Vec<PixelImage> {
    (0..3).map(|i| pattern(48, 40, i)).collect()
}

#[test]
fn schedule_examples() {
    let cfg = TrainConfig {
        steps: 2000,
        ..TrainConfig::default()
    };
    assert_eq!(lr_schedule(0, &cfg).unwrap(), 1e-4);
    assert!((lr_schedule(500, &cfg).unwrap() - 4e-4).abs() < 1e-15);
    assert!((lr_schedule(1999, &cfg).unwrap() - 1e-5).abs() < 1e-9);
    assert!((lr_schedule(250, &cfg).unwrap() - 2.5e-4).abs() < 1e-15);
    let mut prev = f64::INFINITY;
    for s in 500..2000 {
        let lr = lr_schedule(s, &cfg).unwrap();
        assert!(lr <= prev);
        prev = lr;
    }
    assert!(matches!(lr_schedule(2000, &cfg), Err(NetError::StepOutOfRange { step: 2000, steps: 2000 })));

    let ft = TrainConfig::default().fine_tune();
    assert_eq!(lr_schedule(0, &ft).unwrap(), 5e-5);
    assert!((lr_schedule(ft.steps - 1, &ft).unwrap() - 1e-5).abs() < 1e-12);
    let one = TrainConfig { steps: 1, ..TrainConfig::default() };
    assert_eq!(lr_schedule(0, &one).unwrap(), 1e-5);
}

#[test]
fn batches_are_reproducible() {
    let cfg = tiny_train(1);
    let c = corpus();
    let a = make_batch(&c, &cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = make_batch(&c, &cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, make_batch(&c, &cfg, &mut ChaCha8Rng::seed_from_u64(10)).unwrap());
}

/// Invariant under every flip and quarter turn, so the target of any
/// full-image crop is known.
fn symmetric(n: usize) -> PixelImage {
    let f = |i: usize| {
        let d = i.min(n - 1 - i) as f64;
        60.0 * (d * 0.4).sin()
    };
    let planes = (0..3)
        .map(|k| Plane::from_fn(n, n, |r, c| (120.0 + f(r) + f(c) + 10.0 * k as f64).round()))
        .collect();
    PixelImage::new(planes, ColorSpace::Rgb)
}

#[test]
fn targets_are_unquantized_coefficients_of_the_crop() {
    let img = symmetric(32);
    let cfg = TrainConfig {
        batch: 6,
        qf_min: 5,
        qf_max: 60,
        ..tiny_train(1)
    };
    let want = lossless_coefficients(&img, cfg.subsampling).unwrap();
    for s in make_batch(&[img], &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap() {
        assert_eq!(s.target, want);
        assert!((cfg.qf_min..=cfg.qf_max).contains(&s.qf));
    }
}

#[test]
fn inputs_lie_within_half_a_step_of_targets() {
    let cfg = TrainConfig {
        batch: 8,
        qf_min: 10,
        qf_max: 90,
        ..tiny_train(1)
    };
    for s in make_batch(&corpus(), &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap() {
        let qm = s.input.qm(0);
        let deq = dequantized_plane(&s.input.components[0].coeffs, qm);
        for (i, (a, b)) in deq.data.iter().zip(&s.target[0].data).enumerate() {
            let k = (i / deq.width % 8) * 8 + i % deq.width % 8;
            assert!((a - b).abs() <= 0.5 * qm.values[k] as f64 + 1e-9, "entry {i}: {a} vs {b}");
        }
    }
}

#[test]
fn double_compression_batches() {
    let cfg = TrainConfig {
        batch: 16,
        ..tiny_train(1).fine_tune()
    };
    let batch = make_batch(&corpus(), &cfg, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    assert!(batch.iter().all(|s| s.qf1.is_some() && [0, 4].contains(&s.shift.0) && [0, 4].contains(&s.shift.1)));
    assert!(batch.iter().any(|s| s.shift != (0, 0)));
}

#[test]
fn small_images_and_empty_corpus_are_errors() {
    let cfg = tiny_train(1);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(matches!(make_batch(&[pattern(16, 40, 0)], &cfg, &mut rng), Err(NetError::ImageTooSmall { .. })));
    assert!(matches!(make_batch(&[], &cfg, &mut rng), Err(NetError::EmptyCorpus)));
}

#[test]
fn training_trace_follows_schedule_and_moves_parameters() {
    let cfg = tiny_train(6);
    let mut t = Trainer::new(Model::new(tiny_model(), 1).unwrap(), cfg.clone()).unwrap();
    let before = t.model.clone();
    let trace = t.run(&corpus(), |_| {}).unwrap();
    assert_eq!(trace.len(), 6);
    for (i, r) in trace.iter().enumerate() {
        assert_eq!(r.step, i as u64);
        assert_eq!(r.lr, lr_schedule(i as u64, &cfg).unwrap());
        assert!(r.loss.is_finite() && r.loss >= 0.255);
    }
    assert!(t.is_done());
    assert_ne!(t.model, before);
    assert_eq!(t.adam.step, 6);
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let c = corpus();
    let mut full = Trainer::new(Model::new(tiny_model(), 2).unwrap(), tiny_train(5)).unwrap();
    let whole = full.run(&c, |_| {}).unwrap();

    let mut part = Trainer::new(Model::new(tiny_model(), 2).unwrap(), tiny_train(5)).unwrap();
    for _ in 0..3 {
        part.train_step(&c).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.dctx");
    save_checkpoint(&path, &Checkpoint::from_trainer(&part)).unwrap();
    let ck = load_checkpoint(&path, Some(&tiny_model())).unwrap();
    let train = ck.train.clone();
    let mut resumed = ck.into_trainer(train).unwrap();
    assert_eq!(resumed.step, 3);
    let rest = resumed.run(&c, |_| {}).unwrap();
    assert_eq!(&whole[3..], &rest[..]);
    assert_eq!(resumed.model, full.model);
}

#[test]
fn nan_parameters_abort_training() {
    let mut model = Model::new(tiny_model(), 0).unwrap();
    model.params.iter_mut().last().unwrap().value[0] = f32::NAN;
    let mut t = Trainer::new(model, tiny_train(3)).unwrap();
    assert!(matches!(t.train_step(&corpus()), Err(NetError::NonFiniteLoss { step: 0, .. })));
}

#[test]
fn checkpoint_roundtrip_and_errors() {
    let mut t = Trainer::new(Model::new(tiny_model(), 5).unwrap(), tiny_train(2)).unwrap();
    t.train_step(&corpus()).unwrap();
    let ck = Checkpoint::from_trainer(&t);
    let bytes = ck.to_bytes();
    assert_eq!(&bytes[..4], MAGIC);
    let back = Checkpoint::from_bytes(&bytes, None).unwrap();
    assert_eq!(back.model, t.model);
    assert_eq!(back.adam, t.adam);
    assert_eq!(back.train, t.cfg);
    assert_eq!(back.step, 1);
    assert_eq!(back.rng, t.rng);
    assert_eq!(back.to_bytes(), bytes);

    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(Checkpoint::from_bytes(&bad, None), Err(NetError::BadMagic)));
    let mut bad = bytes.clone();
    bad[4] = 9;
    assert!(matches!(Checkpoint::from_bytes(&bad, None), Err(NetError::VersionMismatch { found: 9, .. })));
    for cut in [10, bytes.len() / 2, bytes.len() - 1] {
        assert!(matches!(Checkpoint::from_bytes(&bytes[..cut], None), Err(NetError::TruncatedFile(_))), "cut {cut}");
    }
    let mut bad = bytes.clone();
    let mid = bytes.len() / 2;
    bad[mid] ^= 1;
    assert!(matches!(Checkpoint::from_bytes(&bad, None), Err(NetError::TruncatedFile(_))));
    let other = ModelConfig { embed_dim: 16, ..tiny_model() };
    assert!(matches!(Checkpoint::from_bytes(&bytes, Some(&other)), Err(NetError::ConfigMismatch(_))));
    assert!(matches!(Checkpoint::from_bytes(&bytes, Some(&ModelConfig::toy())), Err(NetError::ConfigMismatch(_))));
}
