use dctx_autodiff::gradcheck::operator_suite;
use dctx_autodiff::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-6;

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn every_operator_matches_finite_differences() {
    let reports = operator_suite(1).unwrap();
    assert!(reports.len() > 80);
    for (name, rep) in reports {
        assert!(rep.checked > 0, "{name}");
        assert!(rep.max_rel < TOL, "{name}: {rep:?}");
    }
}

#[test]
fn softmax_of_equal_logits_is_uniform() {
    let t = Tensor::<f64>::new(&[2, 4], vec![3.0; 8]).unwrap();
    assert!(softmax(&t).unwrap().value().iter().all(|&v| (v - 0.25).abs() < 1e-15));
}

#[test]
fn window_partition_m2_on_2x2_is_identity_layout() {
    let x = Tensor::<f64>::new(&[2, 2, 3], (0..12).map(f64::from).collect()).unwrap();
    let p = window_partition(&x, 2).unwrap();
    assert_eq!(p.shape(), [1, 4, 3]);
    assert_eq!(p.value(), x.value());
}

#[test]
fn shift_roundtrip_and_direction() {
    let x = Tensor::<f64>::new(&[3, 4, 1], (0..12).map(f64::from).collect()).unwrap();
    let s = cyclic_shift(&x, 1).unwrap();
    // content moves towards higher indices
    assert_eq!(s.value()[5], x.value()[0]);
    let back = cyclic_shift(&s, -1).unwrap();
    assert_eq!(back.value(), x.value());
}

#[test]
fn identity_kernel_conv_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let xv = rand_vec(&mut rng, 2 * 5 * 4);
    let x = Tensor::<f64>::new(&[2, 5, 4], xv.clone()).unwrap();
    let mut k = vec![0.0; 2 * 2 * 9];
    k[4] = 1.0;
    k[(2 + 1) * 9 + 4] = 1.0;
    let w = Tensor::new(&[2, 2, 3, 3], k).unwrap();
    assert_eq!(conv2d(&x, &w, None).unwrap().value(), &xv[..]);
}

#[test]
fn transpose_conv_doubles_spatial_dims() {
    let x = Tensor::<f32>::zeros(&[3, 4, 5]);
    let w = Tensor::<f32>::zeros(&[3, 2, 2, 2]);
    assert_eq!(transpose_conv2d(&x, &w, None).unwrap().shape(), [2, 8, 10]);
}

#[test]
fn sum_and_sum_of_squares_gradients() {
    let x = Tensor::<f64>::variable(&[3], vec![1.0, -2.0, 0.5]).unwrap();
    sum(&x).backward().unwrap();
    assert_eq!(x.grad(), vec![1.0, 1.0, 1.0]);
    let y = Tensor::<f64>::variable(&[3], vec![1.0, -2.0, 0.5]).unwrap();
    sum(&square(&y)).backward().unwrap();
    assert_eq!(y.grad(), vec![2.0, -4.0, 1.0]);
}

#[test]
fn shared_subexpression_accumulates() {
    let x = Tensor::<f64>::variable(&[2], vec![3.0, 4.0]).unwrap();
    let y = mul(&x, &x).unwrap();
    sum(&add(&y, &x).unwrap()).backward().unwrap();
    assert_eq!(x.grad(), vec![7.0, 9.0]);
}

#[test]
fn non_scalar_backward_rejected() {
    let x = Tensor::<f64>::variable(&[2], vec![1.0, 2.0]).unwrap();
    assert_eq!(x.backward(), Err(AutodiffError::NonScalarLoss(vec![2])));
}

#[test]
fn shape_errors_reported() {
    let a = Tensor::<f64>::zeros(&[2, 3]);
    let b = Tensor::<f64>::zeros(&[4, 5]);
    assert!(matches!(matmul(&a, &b), Err(AutodiffError::ShapeMismatch { .. })));
    assert!(matches!(add(&a, &b), Err(AutodiffError::ShapeMismatch { .. })));
    assert!(matches!(window_partition(&Tensor::<f64>::zeros(&[3, 4, 1]), 2), Err(AutodiffError::ShapeMismatch { .. })));
}

#[test]
fn f32_and_f64_forward_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let xv = rand_vec(&mut rng, 2 * 4 * 4);
    let wv = rand_vec(&mut rng, 3 * 2 * 9);
    let y64 = conv2d(
        &Tensor::<f64>::new(&[2, 4, 4], xv.clone()).unwrap(),
        &Tensor::new(&[3, 2, 3, 3], wv.clone()).unwrap(),
        None,
    )
    .unwrap();
    let y32 = conv2d(
        &Tensor::<f32>::new(&[2, 4, 4], xv.iter().map(|&v| v as f32).collect()).unwrap(),
        &Tensor::new(&[3, 2, 3, 3], wv.iter().map(|&v| v as f32).collect()).unwrap(),
        None,
    )
    .unwrap();
    for (a, b) in y64.value().iter().zip(y32.value()) {
        assert!((a - *b as f64).abs() < 1e-5);
    }
}
