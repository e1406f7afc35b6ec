mod common;

use dctx_autodiff::{self as ad, Tensor};
use dctx_net::loss::{charbonnier_loss, freq_l1_loss, idct_matrix, pixel_difference};
use dctx_net::{dual_loss, LossConfig, LossDomain};

use common::noise;

fn t(shape: &[usize], v: Vec<f64>) -> Tensor<f64> {
    Tensor::new(shape, v).unwrap()
}

#[test]
fn charbonnier_examples() {
    let x = t(&[2, 3], noise(6, 1));
    assert_eq!(charbonnier_loss(&x, &x, 1e-3).unwrap().item(), 1e-3);
    let y = t(&[2, 3], x.value().iter().map(|v| v + 3e-3).collect());
    let l = charbonnier_loss(&x, &y, 1e-3).unwrap().item();
    assert!((l - 1e-5f64.sqrt()).abs() < 1e-12, "{l}");
    let z = t(&[2, 3], x.value().iter().map(|v| v - 1.0).collect());
    let l = charbonnier_loss(&x, &z, 1e-3).unwrap().item();
    assert!((l - 1.0).abs() / 1.0 < 1e-4);
    assert!(charbonnier_loss(&x, &t(&[6], noise(6, 1)), 1e-3).is_err());
}

#[test]
fn freq_l1_examples() {
    let x = t(&[4, 5], noise(20, 2));
    assert_eq!(freq_l1_loss(&x, &x).unwrap().item(), 0.0);
    let off = t(&[4, 5], x.value().iter().map(|v| v - 2.5).collect());
    assert!((freq_l1_loss(&x, &off).unwrap().item() - 2.5).abs() < 1e-12);
    let y = t(&[4, 5], noise(20, 3));
    let want = x.value().iter().zip(y.value()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 20.0;
    assert!((freq_l1_loss(&x, &y).unwrap().item() - want).abs() < 1e-14);
}

#[test]
fn dual_loss_examples() {
    let x = t(&[192, 2, 3], noise(192 * 6, 4).into_iter().map(|v| v * 300.0).collect());
    let cfg = LossConfig::default();
    let l = dual_loss(&x, &x, &cfg).unwrap().item();
    assert!((l - 0.255).abs() < 1e-12, "{l}");
    let y = t(&[192, 2, 3], noise(192 * 6, 5).into_iter().map(|v| v * 300.0).collect());
    let freq_only = LossConfig { lambda: 0.0, ..cfg };
    assert_eq!(dual_loss(&x, &y, &freq_only).unwrap().item(), freq_l1_loss(&x, &y).unwrap().item());
    let freq = LossConfig { domain: LossDomain::Frequency, ..cfg };
    assert_eq!(dual_loss(&x, &y, &freq).unwrap().item(), freq_l1_loss(&x, &y).unwrap().item());
    assert!(dual_loss(&x, &y, &cfg).unwrap().item() >= 0.255);
    assert!(dual_loss(&x, &y, &LossConfig { domain: LossDomain::Pixel, ..cfg }).unwrap().item() > 0.0);
}

/// A DC-only difference of d spreads d/8 over the block; a Cr difference
/// shows up as 1.402 · (d/8) in red.
#[test]
fn pixel_difference_of_dc_offsets() {
    let mut v = vec![0.0; 64 * 2];
    v[0] = 8.0;
    let p = pixel_difference(&t(&[64, 1, 2], v)).unwrap();
    assert_eq!(p.shape(), &[1, 2, 64]);
    for (i, &x) in p.value().iter().enumerate() {
        let want = if i < 64 { 1.0 / 255.0 } else { 0.0 };
        assert!((x - want).abs() < 1e-15, "{i}: {x}");
    }
    let mut v = vec![0.0; 192];
    v[128] = 8.0;
    let p = pixel_difference(&t(&[192, 1, 1], v)).unwrap();
    assert_eq!(p.shape(), &[1, 64, 3]);
    for px in p.value().chunks(3) {
        assert!((px[0] - 1.402 / 255.0).abs() < 1e-15);
        assert!((px[1] + 0.714_136 / 255.0).abs() < 1e-15);
        assert!(px[2].abs() < 1e-15);
    }
    assert!(pixel_difference(&t(&[128, 1, 1], vec![0.0; 128])).is_err());
}

#[test]
fn idct_matrix_is_orthogonal() {
    let m = idct_matrix();
    for a in 0..64 {
        for b in 0..64 {
            let dot: f64 = (0..64).map(|p| m[a * 64 + p] * m[b * 64 + p]).sum();
            assert!((dot - f64::from(a == b)).abs() < 1e-12);
        }
    }
}

#[test]
fn loss_gradient_matches_differences_away_from_kinks() {
    let x = noise(192 * 2, 6);
    let y: Vec<f64> = noise(192 * 2, 7).into_iter().map(|v| v + v.signum() * 0.5).collect();
    let cfg = LossConfig::default();
    let r = dctx_autodiff::gradcheck::check(
        |ts| Ok(dual_loss(&ts[0], &ad::add(&ts[0], &ts[1]).unwrap(), &cfg).unwrap()),
        &[(vec![192, 1, 2], x), (vec![192, 1, 2], y)],
        200,
        1e-3,
    )
    .unwrap();
    assert!(r.max_rel < 1e-6, "{r:?}");
}
