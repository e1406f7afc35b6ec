//! Central-difference gradient checking in double precision.

use crate::{mul, sum, Result, Tensor};

pub const STEP: f64 = 1e-5;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    /// max |a - n| / max(|a|, |n|, floor) over checked coordinates
    pub max_rel: f64,
    pub max_abs: f64,
    pub checked: usize,
    /// (input, index, analytic, numeric) of the worst coordinate
    pub worst: Option<(usize, usize, f64, f64)>,
}

/// Fixed pseudo-random projection weights so that non-scalar outputs reduce
/// to a loss whose gradient exercises every output element differently.
pub fn projection(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i as f64) * 1.618_034 + 0.3).sin() + 0.25).collect()
}

fn project(out: &Tensor<f64>) -> Result<Tensor<f64>> {
    let w = Tensor::new(out.shape(), projection(out.numel()))?;
    Ok(sum(&mul(out, &w)?))
}

/// Compares the analytic gradient of `sum(proj ⊙ f(inputs))` with central
/// differences for every input. At most `max_coords` evenly spaced
/// coordinates are probed per input.
pub fn check<F>(f: F, inputs: &[(Vec<usize>, Vec<f64>)], max_coords: usize, floor: f64) -> Result<Report>
where
    F: Fn(&[Tensor<f64>]) -> Result<Tensor<f64>>,
{
    check_with_step(f, inputs, max_coords, floor, STEP)
}

/// [`check`] with an explicit difference step. Deep graphs summed over many
/// outputs need a larger step to keep round-off below truncation error.
pub fn check_with_step<F>(
    f: F,
    inputs: &[(Vec<usize>, Vec<f64>)],
    max_coords: usize,
    floor: f64,
    step: f64,
) -> Result<Report>
where
    F: Fn(&[Tensor<f64>]) -> Result<Tensor<f64>>,
{
    let leaves = inputs
        .iter()
        .map(|(s, v)| Tensor::variable(s, v.clone()))
        .collect::<Result<Vec<_>>>()?;
    let loss = project(&f(&leaves)?)?;
    loss.backward()?;
    let analytic: Vec<Vec<f64>> = leaves.iter().map(|t| t.grad()).collect();

    let eval = |vals: &[Vec<f64>]| -> Result<f64> {
        let ts = inputs
            .iter()
            .zip(vals)
            .map(|((s, _), v)| Tensor::new(s, v.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(project(&f(&ts)?)?.item())
    };

    let mut vals: Vec<Vec<f64>> = inputs.iter().map(|(_, v)| v.clone()).collect();
    let mut rep = Report::default();
    for (inp, (_, v)) in inputs.iter().enumerate() {
        let n = v.len();
        let stride = n.div_ceil(max_coords.max(1)).max(1);
        for idx in (0..n).step_by(stride) {
            let x0 = vals[inp][idx];
            vals[inp][idx] = x0 + step;
            let up = eval(&vals)?;
            vals[inp][idx] = x0 - step;
            let down = eval(&vals)?;
            vals[inp][idx] = x0;
            let num = (up - down) / (2.0 * step);
            let a = analytic[inp][idx];
            let abs = (a - num).abs();
            let rel = abs / a.abs().max(num.abs()).max(floor);
            rep.checked += 1;
            rep.max_abs = rep.max_abs.max(abs);
            if rel > rep.max_rel || rep.worst.is_none() {
                rep.max_rel = rep.max_rel.max(rel);
                rep.worst = Some((inp, idx, a, num));
            }
        }
    }
    Ok(rep)
}

type Input = (Vec<usize>, Vec<f64>);
type Case = (String, Box<dyn Fn(&[Tensor<f64>]) -> Result<Tensor<f64>>>, Vec<Input>);

/// Every operator, over a few shapes each, with seeded inputs in [-1, 1).
/// Returns one report per (operator, shape) case.
pub fn operator_suite(seed: u64) -> Result<Vec<(String, Report)>> {
    use crate::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::rc::Rc;

    let mut rng = StdRng::seed_from_u64(seed);
    let mut input = |shape: &[usize]| -> Input {
        let n = shape.iter().product();
        (shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
    };
    let mut cases: Vec<Case> = Vec::new();
    let mut case = |name: &str, f: Box<dyn Fn(&[Tensor<f64>]) -> Result<Tensor<f64>>>, inputs: Vec<Input>| {
        cases.push((name.to_string(), f, inputs));
    };

    for shape in [vec![5], vec![3, 4], vec![2, 3, 4]] {
        let a = input(&shape);
        let b = input(&shape);
        let tail = input(&shape[shape.len() - 1..]);
        let pos = (shape.clone(), a.1.iter().map(|v| v.abs() + 0.5).collect());
        case("add", Box::new(|t| add(&t[0], &t[1])), vec![a.clone(), b.clone()]);
        case("add_broadcast", Box::new(|t| add(&t[0], &t[1])), vec![a.clone(), tail.clone()]);
        case("sub", Box::new(|t| sub(&t[1], &t[0])), vec![a.clone(), b.clone()]);
        case("mul", Box::new(|t| mul(&t[0], &t[1])), vec![a.clone(), b]);
        case("mul_broadcast", Box::new(|t| mul(&t[1], &t[0])), vec![a.clone(), tail]);
        case("scale_neg", Box::new(|t| Ok(scale(&neg(&t[0]), 2.5))), vec![a.clone()]);
        case("add_scalar", Box::new(|t| Ok(add_scalar(&t[0], 0.7))), vec![a.clone()]);
        case("square", Box::new(|t| Ok(square(&t[0]))), vec![a.clone()]);
        case("sqrt", Box::new(|t| Ok(sqrt(&t[0]))), vec![pos]);
        case("abs", Box::new(|t| Ok(abs(&t[0]))), vec![a.clone()]);
        case("sum", Box::new(|t| Ok(sum(&square(&t[0])))), vec![a.clone()]);
        case("mean", Box::new(|t| Ok(mean(&t[0]))), vec![a.clone()]);
        case("gelu", Box::new(|t| Ok(gelu(&t[0]))), vec![a.clone()]);
        case("softmax", Box::new(|t| softmax(&t[0])), vec![a.clone()]);
        case("layer_norm", Box::new(|t| layer_norm(&t[0], 1e-5)), vec![a]);
    }
    for (m, k, n) in [(1, 1, 1), (3, 4, 5), (7, 2, 3)] {
        let a = input(&[2, m, k]);
        let w = input(&[k, n]);
        let b = input(&[2, k, n]);
        let bt = input(&[2, n, k]);
        case("matmul", Box::new(|t| matmul(&t[0], &t[1])), vec![a.clone(), w]);
        case("bmm", Box::new(|t| bmm(&t[0], &t[1], false)), vec![a.clone(), b]);
        case("bmm_transposed", Box::new(|t| bmm(&t[0], &t[1], true)), vec![a, bt]);
    }
    for shape in [vec![2, 3, 4], vec![4, 1, 3], vec![3, 2, 2]] {
        let a = input(&shape);
        let b = input(&shape);
        let n: usize = shape.iter().product();
        let last = shape[2];
        let idx = Rc::new((0..n).map(|i| (i * 7) % n).chain([0, 0]).collect::<Vec<_>>());
        case("reshape", Box::new(move |t| reshape(&t[0], &[n])), vec![a.clone()]);
        case("permute", Box::new(|t| permute(&t[0], &[2, 0, 1])), vec![a.clone()]);
        case("concat", Box::new(|t| concat(&[t[0].clone(), t[1].clone()], 1)), vec![a.clone(), b]);
        case("slice", Box::new(move |t| slice(&t[0], 2, 1, last)), vec![a.clone()]);
        case("gather", Box::new(move |t| gather(&t[0], idx.clone(), &[n + 2])), vec![a]);
    }
    for (cin, cout, h, w, k) in [(1, 1, 3, 3, 1), (2, 3, 4, 5, 3), (3, 2, 5, 3, 3)] {
        let x = input(&[cin, h, w]);
        let wt = input(&[cout, cin, k, k]);
        let b = input(&[cout]);
        let dw = input(&[cin, 1, k, k]);
        let db = input(&[cin]);
        let tw = input(&[cin, cout, 2, 2]);
        let tb = input(&[cout]);
        case("conv2d", Box::new(|t| conv2d(&t[0], &t[1], Some(&t[2]))), vec![x.clone(), wt.clone(), b]);
        case("conv2d_nobias", Box::new(|t| conv2d(&t[0], &t[1], None)), vec![x.clone(), wt]);
        case("depthwise_conv2d", Box::new(|t| depthwise_conv2d(&t[0], &t[1], Some(&t[2]))), vec![x.clone(), dw, db]);
        case("transpose_conv2d", Box::new(|t| transpose_conv2d(&t[0], &t[1], Some(&t[2]))), vec![x, tw, tb]);
    }
    for (h, w, c, m) in [(2, 2, 1, 2), (4, 4, 3, 2), (4, 6, 2, 2)] {
        let x = input(&[h, w, c]);
        case("window_partition", Box::new(move |t| window_partition(&t[0], m)), vec![x.clone()]);
        case("cyclic_shift", Box::new(|t| cyclic_shift(&t[0], -1)), vec![x.clone()]);
        case(
            "window_reverse",
            Box::new(move |t| window_reverse(&window_partition(&cyclic_shift(&t[0], 1)?, m)?, m, h, w)),
            vec![x],
        );
    }
    let x = input(&[3, 4]);
    let w = input(&[4, 4]);
    case(
        "attention_with_reuse",
        Box::new(|t| {
            let h = matmul(&t[0], &t[1])?;
            let h3 = reshape(&h, &[1, 3, 4])?;
            let s = softmax(&bmm(&h3, &h3, true)?)?;
            let o = bmm(&s, &h3, false)?;
            add(&layer_norm(&o, 1e-5)?, &reshape(&t[0], &[1, 3, 4])?)
        }),
        vec![x, w],
    );

    cases
        .into_iter()
        .map(|(name, f, inputs)| check(f, &inputs, 200, 1e-3).map(|r| (name, r)))
        .collect()
}
