use crate::error::mismatch;
use crate::{Real, Result, Tensor};

fn last_dim<T: Real>(op: &'static str, a: &Tensor<T>) -> Result<usize> {
    match a.shape().last() {
        Some(&d) if d > 0 => Ok(d),
        _ => Err(mismatch(op, format!("needs a non-empty last axis, got {:?}", a.shape()))),
    }
}

/// Softmax over the last axis.
pub fn softmax<T: Real>(a: &Tensor<T>) -> Result<Tensor<T>> {
    let d = last_dim("softmax", a)?;
    let mut value = a.value().to_vec();
    for row in value.chunks_mut(d) {
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut s = T::zero();
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            s = s + *v;
        }
        row.iter_mut().for_each(|v| *v = *v / s);
    }
    Ok(Tensor::from_op(
        a.shape().to_vec(),
        value,
        vec![a.clone()],
        Box::new(move |g, y, _| {
            let mut ga = Vec::with_capacity(g.len());
            for (gr, yr) in g.chunks(d).zip(y.chunks(d)) {
                let dot: T = gr.iter().zip(yr).map(|(&a, &b)| a * b).sum();
                ga.extend(gr.iter().zip(yr).map(|(&gi, &yi)| yi * (gi - dot)));
            }
            vec![Some(ga)]
        }),
    ))
}

/// Normalize over the last axis (biased variance); no affine part.
pub fn layer_norm<T: Real>(a: &Tensor<T>, eps: f64) -> Result<Tensor<T>> {
    let d = last_dim("layer_norm", a)?;
    let dt = T::c(d as f64);
    let eps = T::c(eps);
    let rows = a.numel() / d;
    let mut value = Vec::with_capacity(a.numel());
    let mut rstd = Vec::with_capacity(rows);
    for row in a.value().chunks(d) {
        let mu = row.iter().copied().sum::<T>() / dt;
        let var = row.iter().map(|&x| (x - mu) * (x - mu)).sum::<T>() / dt;
        let r = T::one() / (var + eps).sqrt();
        value.extend(row.iter().map(|&x| (x - mu) * r));
        rstd.push(r);
    }
    Ok(Tensor::from_op(
        a.shape().to_vec(),
        value,
        vec![a.clone()],
        Box::new(move |g, xhat, _| {
            let mut ga = Vec::with_capacity(g.len());
            for ((gr, xr), &r) in g.chunks(d).zip(xhat.chunks(d)).zip(&rstd) {
                let mg = gr.iter().copied().sum::<T>() / dt;
                let mgx = gr.iter().zip(xr).map(|(&a, &b)| a * b).sum::<T>() / dt;
                ga.extend(gr.iter().zip(xr).map(|(&gi, &xi)| r * (gi - mg - xi * mgx)));
            }
            vec![Some(ga)]
        }),
    ))
}

/// Exact (erf) GELU.
pub fn gelu<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    let half = T::c(0.5);
    let rsqrt2 = T::c(std::f64::consts::FRAC_1_SQRT_2);
    let inv_sqrt_2pi = T::c(1.0 / (2.0 * std::f64::consts::PI).sqrt());
    let value = a
        .value()
        .iter()
        .map(|&x| half * x * (T::one() + (x * rsqrt2).erf()))
        .collect();
    Tensor::from_op(
        a.shape().to_vec(),
        value,
        vec![a.clone()],
        Box::new(move |g, _, p| {
            let x = p[0].value();
            vec![Some(
                g.iter()
                    .zip(x)
                    .map(|(&gi, &xi)| {
                        let cdf = half * (T::one() + (xi * rsqrt2).erf());
                        let pdf = inv_sqrt_2pi * (-half * xi * xi).exp();
                        gi * (cdf + xi * pdf)
                    })
                    .collect(),
            )]
        }),
    )
}
