use crate::error::mismatch;
use crate::{Real, Result, Tensor};

/// `a[..., k] · w[k, n]`, treating all leading axes of `a` as rows.
pub fn matmul<T: Real>(a: &Tensor<T>, w: &Tensor<T>) -> Result<Tensor<T>> {
    let (ash, wsh) = (a.shape(), w.shape());
    if ash.is_empty() || wsh.len() != 2 || ash[ash.len() - 1] != wsh[0] {
        return Err(mismatch("matmul", format!("{ash:?} x {wsh:?}")));
    }
    let (k, n) = (wsh[0], wsh[1]);
    let r = a.numel() / k.max(1);
    let mut out = vec![T::zero(); r * n];
    T::gemm(r, k, n, a.value(), (k as isize, 1), w.value(), (n as isize, 1), T::zero(), &mut out, (n as isize, 1));
    let mut shape = ash.to_vec();
    *shape.last_mut().unwrap() = n;
    Ok(Tensor::from_op(
        shape,
        out,
        vec![a.clone(), w.clone()],
        Box::new(move |g, _, p| {
            let ga = p[0].requires_grad().then(|| {
                let mut ga = vec![T::zero(); r * k];
                T::gemm(r, n, k, g, (n as isize, 1), p[1].value(), (1, n as isize), T::zero(), &mut ga, (k as isize, 1));
                ga
            });
            let gw = p[1].requires_grad().then(|| {
                let mut gw = vec![T::zero(); k * n];
                T::gemm(k, r, n, p[0].value(), (1, k as isize), g, (n as isize, 1), T::zero(), &mut gw, (n as isize, 1));
                gw
            });
            vec![ga, gw]
        }),
    ))
}

/// Batched product of `a[B, m, k]` with `b[B, k, n]`, or with `b[B, n, k]`
/// transposed when `transpose_b` is set.
pub fn bmm<T: Real>(a: &Tensor<T>, b: &Tensor<T>, transpose_b: bool) -> Result<Tensor<T>> {
    let (ash, bsh) = (a.shape(), b.shape());
    let ok = ash.len() == 3 && bsh.len() == 3 && ash[0] == bsh[0];
    let (bk, bn) = if transpose_b { (bsh.get(2), bsh.get(1)) } else { (bsh.get(1), bsh.get(2)) };
    if !ok || bk != ash.get(2) {
        return Err(mismatch("bmm", format!("{ash:?} x {bsh:?} (transpose_b = {transpose_b})")));
    }
    let (batch, m, k, n) = (ash[0], ash[1], ash[2], *bn.unwrap());
    let (ki, ni) = (k as isize, n as isize);
    // strides of op(B) viewed as k x n, and of op(B)^T viewed as n x k
    let (b_str, bt_str) = if transpose_b { ((1, ki), (ki, 1)) } else { ((ni, 1), (1, ni)) };
    let mut out = vec![T::zero(); batch * m * n];
    for i in 0..batch {
        T::gemm(
            m,
            k,
            n,
            &a.value()[i * m * k..],
            (ki, 1),
            &b.value()[i * k * n..],
            b_str,
            T::zero(),
            &mut out[i * m * n..],
            (ni, 1),
        );
    }
    Ok(Tensor::from_op(
        vec![batch, m, n],
        out,
        vec![a.clone(), b.clone()],
        Box::new(move |g, _, p| {
            let (av, bv) = (p[0].value(), p[1].value());
            let ga = p[0].requires_grad().then(|| {
                let mut ga = vec![T::zero(); batch * m * k];
                for i in 0..batch {
                    T::gemm(m, n, k, &g[i * m * n..], (ni, 1), &bv[i * k * n..], bt_str, T::zero(), &mut ga[i * m * k..], (ki, 1));
                }
                ga
            });
            let gb = p[1].requires_grad().then(|| {
                let mut gb = vec![T::zero(); batch * k * n];
                for i in 0..batch {
                    let (gi, ai, out) = (&g[i * m * n..], &av[i * m * k..], &mut gb[i * k * n..]);
                    if transpose_b {
                        // dB (n x k) = G^T A
                        T::gemm(n, m, k, gi, (1, ni), ai, (ki, 1), T::zero(), out, (ki, 1));
                    } else {
                        // dB (k x n) = A^T G
                        T::gemm(k, m, n, ai, (1, ki), gi, (ni, 1), T::zero(), out, (ni, 1));
                    }
                }
                gb
            });
            vec![ga, gb]
        }),
    ))
}
