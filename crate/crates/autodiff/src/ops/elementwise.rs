//! Pointwise arithmetic and full reductions. Binary ops broadcast when one
//! shape is a suffix of the other (bias-style).

use crate::error::mismatch;
use crate::{Real, Result, Tensor};

fn is_suffix(small: &[usize], big: &[usize]) -> bool {
    small.len() <= big.len() && big[big.len() - small.len()..] == *small
}

/// Orders (a, b) so that b's shape is a suffix of a's.
fn broadcast_order<'a, T: Real>(
    op: &'static str,
    a: &'a Tensor<T>,
    b: &'a Tensor<T>,
) -> Result<(&'a Tensor<T>, &'a Tensor<T>, bool)> {
    if is_suffix(b.shape(), a.shape()) {
        Ok((a, b, false))
    } else if is_suffix(a.shape(), b.shape()) {
        Ok((b, a, true))
    } else {
        Err(mismatch(op, format!("{:?} vs {:?}", a.shape(), b.shape())))
    }
}

fn reduce_to<T: Real>(g: &[T], m: usize) -> Vec<T> {
    let mut out = vec![T::zero(); m];
    for chunk in g.chunks(m) {
        for (o, &v) in out.iter_mut().zip(chunk) {
            *o = *o + v;
        }
    }
    out
}

pub fn add<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let (big, small, _) = broadcast_order("add", a, b)?;
    let m = small.numel().max(1);
    let sv = small.value();
    let value = big
        .value()
        .chunks(m)
        .flat_map(|c| c.iter().zip(sv).map(|(&x, &y)| x + y))
        .collect();
    Ok(Tensor::from_op(
        big.shape().to_vec(),
        value,
        vec![big.clone(), small.clone()],
        Box::new(move |g, _, _| vec![Some(g.to_vec()), Some(reduce_to(g, m))]),
    ))
}

pub fn sub<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    add(a, &neg(b))
}

pub fn mul<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let (big, small, _) = broadcast_order("mul", a, b)?;
    let m = small.numel().max(1);
    let sv = small.value();
    let value = big
        .value()
        .chunks(m)
        .flat_map(|c| c.iter().zip(sv).map(|(&x, &y)| x * y))
        .collect();
    Ok(Tensor::from_op(
        big.shape().to_vec(),
        value,
        vec![big.clone(), small.clone()],
        Box::new(move |g, _, parents| {
            let (bv, sv) = (parents[0].value(), parents[1].value());
            let gb = g
                .chunks(m)
                .flat_map(|c| c.iter().zip(sv).map(|(&gi, &y)| gi * y))
                .collect();
            let gs = if parents[1].requires_grad() {
                let prod: Vec<T> = g.iter().zip(bv).map(|(&gi, &x)| gi * x).collect();
                Some(reduce_to(&prod, m))
            } else {
                None
            };
            vec![Some(gb), gs]
        }),
    ))
}

fn unary<T: Real>(
    a: &Tensor<T>,
    f: impl Fn(T) -> T,
    df: impl Fn(T, T) -> T + 'static,
) -> Tensor<T> {
    let value = a.value().iter().map(|&x| f(x)).collect();
    Tensor::from_op(
        a.shape().to_vec(),
        value,
        vec![a.clone()],
        Box::new(move |g, out, parents| {
            let x = parents[0].value();
            vec![Some(
                g.iter()
                    .zip(x.iter().zip(out))
                    .map(|(&gi, (&xi, &yi))| gi * df(xi, yi))
                    .collect(),
            )]
        }),
    )
}

pub fn scale<T: Real>(a: &Tensor<T>, s: f64) -> Tensor<T> {
    let s = T::c(s);
    unary(a, move |x| x * s, move |_, _| s)
}

pub fn neg<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    scale(a, -1.0)
}

pub fn add_scalar<T: Real>(a: &Tensor<T>, s: f64) -> Tensor<T> {
    let s = T::c(s);
    unary(a, move |x| x + s, |_, _| T::one())
}

pub fn square<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    unary(a, |x| x * x, |x, _| T::c(2.0) * x)
}

pub fn sqrt<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    unary(a, |x| x.sqrt(), |_, y| T::c(0.5) / y)
}

/// |x| with subgradient 0 at the origin.
pub fn abs<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    unary(
        a,
        |x| x.abs(),
        |x, _| {
            if x > T::zero() {
                T::one()
            } else if x < T::zero() {
                -T::one()
            } else {
                T::zero()
            }
        },
    )
}

pub fn sum<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    let n = a.numel();
    let s = a.value().iter().copied().sum();
    Tensor::from_op(
        Vec::new(),
        vec![s],
        vec![a.clone()],
        Box::new(move |g, _, _| vec![Some(vec![g[0]; n])]),
    )
}

pub fn mean<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    scale(&sum(a), 1.0 / a.numel().max(1) as f64)
}
