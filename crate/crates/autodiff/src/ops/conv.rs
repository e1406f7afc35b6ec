//! Convolutions on single (C, H, W) feature maps.

use crate::error::mismatch;
use crate::{Real, Result, Tensor};

fn check_map<T: Real>(op: &'static str, x: &Tensor<T>) -> Result<(usize, usize, usize)> {
    match *x.shape() {
        [c, h, w] => Ok((c, h, w)),
        _ => Err(mismatch(op, format!("input must be (C, H, W), got {:?}", x.shape()))),
    }
}

fn check_bias<T: Real>(op: &'static str, b: Option<&Tensor<T>>, n: usize) -> Result<()> {
    match b {
        Some(b) if b.shape() != [n] => Err(mismatch(op, format!("bias {:?}, expected [{n}]", b.shape()))),
        _ => Ok(()),
    }
}

fn bias_grad<T: Real>(g: &[T], channels: usize) -> Vec<T> {
    let per = g.len() / channels;
    g.chunks(per).map(|c| c.iter().copied().sum()).collect()
}

fn im2col<T: Real>(x: &[T], c: usize, h: usize, w: usize, k: usize) -> Vec<T> {
    let p = k / 2;
    let hw = h * w;
    let mut cols = vec![T::zero(); c * k * k * hw];
    for ci in 0..c {
        for ky in 0..k {
            for kx in 0..k {
                let row = &mut cols[((ci * k + ky) * k + kx) * hw..][..hw];
                for i in 0..h {
                    let si = i as isize + ky as isize - p as isize;
                    if si < 0 || si >= h as isize {
                        continue;
                    }
                    let src = &x[ci * hw + si as usize * w..][..w];
                    for j in 0..w {
                        let sj = j as isize + kx as isize - p as isize;
                        if sj >= 0 && sj < w as isize {
                            row[i * w + j] = src[sj as usize];
                        }
                    }
                }
            }
        }
    }
    cols
}

fn col2im<T: Real>(cols: &[T], c: usize, h: usize, w: usize, k: usize) -> Vec<T> {
    let p = k / 2;
    let hw = h * w;
    let mut x = vec![T::zero(); c * hw];
    for ci in 0..c {
        for ky in 0..k {
            for kx in 0..k {
                let row = &cols[((ci * k + ky) * k + kx) * hw..][..hw];
                for i in 0..h {
                    let si = i as isize + ky as isize - p as isize;
                    if si < 0 || si >= h as isize {
                        continue;
                    }
                    let dst = &mut x[ci * hw + si as usize * w..][..w];
                    for j in 0..w {
                        let sj = j as isize + kx as isize - p as isize;
                        if sj >= 0 && sj < w as isize {
                            dst[sj as usize] = dst[sj as usize] + row[i * w + j];
                        }
                    }
                }
            }
        }
    }
    x
}

/// Stride-1 "same" convolution: `x (Cin, H, W)`, `w (Cout, Cin, k, k)` with
/// odd k, zero padding k / 2.
pub fn conv2d<T: Real>(x: &Tensor<T>, w: &Tensor<T>, b: Option<&Tensor<T>>) -> Result<Tensor<T>> {
    let (cin, h, wd) = check_map("conv2d", x)?;
    let (cout, k) = match *w.shape() {
        [co, ci, k, k2] if ci == cin && k == k2 && k % 2 == 1 => (co, k),
        _ => return Err(mismatch("conv2d", format!("weight {:?} for input {:?}", w.shape(), x.shape()))),
    };
    check_bias("conv2d", b, cout)?;
    let hw = h * wd;
    let ckk = cin * k * k;
    let cols = im2col(x.value(), cin, h, wd, k);
    let mut out = vec![T::zero(); cout * hw];
    if let Some(b) = b {
        for (o, &bv) in b.value().iter().enumerate() {
            out[o * hw..(o + 1) * hw].iter_mut().for_each(|v| *v = bv);
        }
    }
    let beta = if b.is_some() { T::one() } else { T::zero() };
    T::gemm(cout, ckk, hw, w.value(), (ckk as isize, 1), &cols, (hw as isize, 1), beta, &mut out, (hw as isize, 1));
    let mut parents = vec![x.clone(), w.clone()];
    parents.extend(b.cloned());
    Ok(Tensor::from_op(
        vec![cout, h, wd],
        out,
        parents,
        Box::new(move |g, _, p| {
            let gx = p[0].requires_grad().then(|| {
                let mut gcols = vec![T::zero(); ckk * hw];
                T::gemm(ckk, cout, hw, p[1].value(), (1, ckk as isize), g, (hw as isize, 1), T::zero(), &mut gcols, (hw as isize, 1));
                col2im(&gcols, cin, h, wd, k)
            });
            let gw = p[1].requires_grad().then(|| {
                let mut gw = vec![T::zero(); cout * ckk];
                T::gemm(cout, hw, ckk, g, (hw as isize, 1), &cols, (1, hw as isize), T::zero(), &mut gw, (ckk as isize, 1));
                gw
            });
            let mut grads = vec![gx, gw];
            if p.len() == 3 {
                grads.push(Some(bias_grad(g, cout)));
            }
            grads
        }),
    ))
}

/// Calls `f(channel, tap, output offset, input offset)` for every in-bounds
/// tap of a per-channel "same" convolution.
fn depthwise_taps(c: usize, h: usize, w: usize, k: usize, f: &mut dyn FnMut(usize, usize, usize, usize)) {
    let p = (k / 2) as isize;
    let hw = h * w;
    for ci in 0..c {
        for ky in 0..k {
            for kx in 0..k {
                let t = ky * k + kx;
                for i in 0..h {
                    let si = i as isize + ky as isize - p;
                    if si < 0 || si >= h as isize {
                        continue;
                    }
                    for j in 0..w {
                        let sj = j as isize + kx as isize - p;
                        if sj >= 0 && sj < w as isize {
                            f(ci, t, ci * hw + i * w + j, ci * hw + si as usize * w + sj as usize);
                        }
                    }
                }
            }
        }
    }
}

/// Per-channel "same" convolution: `w (C, 1, k, k)`.
pub fn depthwise_conv2d<T: Real>(x: &Tensor<T>, w: &Tensor<T>, b: Option<&Tensor<T>>) -> Result<Tensor<T>> {
    let (c, h, wd) = check_map("depthwise_conv2d", x)?;
    let k = match *w.shape() {
        [co, 1, k, k2] if co == c && k == k2 && k % 2 == 1 => k,
        _ => {
            return Err(mismatch(
                "depthwise_conv2d",
                format!("weight {:?} for input {:?}", w.shape(), x.shape()),
            ))
        }
    };
    check_bias("depthwise_conv2d", b, c)?;
    let hw = h * wd;
    let each = move |f: &mut dyn FnMut(usize, usize, usize, usize)| depthwise_taps(c, h, wd, k, f);
    let (xv, wv) = (x.value(), w.value());
    let mut out = vec![T::zero(); c * hw];
    if let Some(b) = b {
        for (ci, &bv) in b.value().iter().enumerate() {
            out[ci * hw..(ci + 1) * hw].iter_mut().for_each(|v| *v = bv);
        }
    }
    each(&mut |ci, t, o, s| out[o] = out[o] + wv[ci * k * k + t] * xv[s]);
    let mut parents = vec![x.clone(), w.clone()];
    parents.extend(b.cloned());
    Ok(Tensor::from_op(
        vec![c, h, wd],
        out,
        parents,
        Box::new(move |g, _, par| {
            let (xv, wv) = (par[0].value(), par[1].value());
            let mut gx = vec![T::zero(); c * hw];
            let mut gw = vec![T::zero(); c * k * k];
            each(&mut |ci, t, o, s| {
                gx[s] = gx[s] + wv[ci * k * k + t] * g[o];
                gw[ci * k * k + t] = gw[ci * k * k + t] + xv[s] * g[o];
            });
            let mut grads = vec![Some(gx), Some(gw)];
            if par.len() == 3 {
                grads.push(Some(bias_grad(g, c)));
            }
            grads
        }),
    ))
}

/// Kernel-2, stride-2 transposed convolution doubling both spatial dims:
/// `w (Cin, Cout, 2, 2)`, `out[o, 2i+a, 2j+b] = sum_c x[c,i,j] w[c,o,a,b]`.
pub fn transpose_conv2d<T: Real>(x: &Tensor<T>, w: &Tensor<T>, b: Option<&Tensor<T>>) -> Result<Tensor<T>> {
    let (cin, h, wd) = check_map("transpose_conv2d", x)?;
    let cout = match *w.shape() {
        [ci, co, 2, 2] if ci == cin => co,
        _ => {
            return Err(mismatch(
                "transpose_conv2d",
                format!("weight {:?} for input {:?}", w.shape(), x.shape()),
            ))
        }
    };
    check_bias("transpose_conv2d", b, cout)?;
    let hw = h * wd;
    let q = cout * 4;
    // y[(o, a, b), site] = sum_c w[c, (o, a, b)] x[c, site]
    let mut y = vec![T::zero(); q * hw];
    T::gemm(q, cin, hw, w.value(), (1, q as isize), x.value(), (hw as isize, 1), T::zero(), &mut y, (hw as isize, 1));
    let (oh, ow) = (2 * h, 2 * wd);
    let place = move |r: usize, site: usize| -> usize {
        let (o, ab) = (r / 4, r % 4);
        let (i, j) = (site / wd, site % wd);
        (o * oh + 2 * i + ab / 2) * ow + 2 * j + ab % 2
    };
    let mut out = vec![T::zero(); cout * oh * ow];
    for r in 0..q {
        for site in 0..hw {
            out[place(r, site)] = y[r * hw + site];
        }
    }
    if let Some(b) = b {
        for (o, &bv) in b.value().iter().enumerate() {
            out[o * oh * ow..(o + 1) * oh * ow].iter_mut().for_each(|v| *v = *v + bv);
        }
    }
    let mut parents = vec![x.clone(), w.clone()];
    parents.extend(b.cloned());
    Ok(Tensor::from_op(
        vec![cout, oh, ow],
        out,
        parents,
        Box::new(move |g, _, p| {
            let mut gy = vec![T::zero(); q * hw];
            for r in 0..q {
                for site in 0..hw {
                    gy[r * hw + site] = g[place(r, site)];
                }
            }
            let gx = p[0].requires_grad().then(|| {
                let mut gx = vec![T::zero(); cin * hw];
                T::gemm(cin, q, hw, p[1].value(), (q as isize, 1), &gy, (hw as isize, 1), T::zero(), &mut gx, (hw as isize, 1));
                gx
            });
            let gw = p[1].requires_grad().then(|| {
                let mut gw = vec![T::zero(); cin * q];
                T::gemm(cin, hw, q, p[0].value(), (hw as isize, 1), &gy, (1, hw as isize), T::zero(), &mut gw, (q as isize, 1));
                gw
            });
            let mut grads = vec![gx, gw];
            if p.len() == 3 {
                grads.push(Some(bias_grad(g, cout)));
            }
            grads
        }),
    ))
}
