use std::rc::Rc;

use crate::error::mismatch;
use crate::tensor::numel;
use crate::{Real, Result, Tensor};

pub fn reshape<T: Real>(a: &Tensor<T>, shape: &[usize]) -> Result<Tensor<T>> {
    if numel(shape) != a.numel() {
        return Err(mismatch("reshape", format!("{:?} -> {shape:?}", a.shape())));
    }
    Ok(Tensor::from_op(
        shape.to_vec(),
        a.value().to_vec(),
        vec![a.clone()],
        Box::new(|g, _, _| vec![Some(g.to_vec())]),
    ))
}

/// `out[i] = a[index[i]]`; the backward pass scatter-adds, so repeated
/// indices are allowed.
pub fn gather<T: Real>(a: &Tensor<T>, index: Rc<Vec<usize>>, shape: &[usize]) -> Result<Tensor<T>> {
    if numel(shape) != index.len() {
        return Err(mismatch("gather", format!("{} indices for shape {shape:?}", index.len())));
    }
    if let Some(&bad) = index.iter().find(|&&i| i >= a.numel()) {
        return Err(mismatch("gather", format!("index {bad} out of {}", a.numel())));
    }
    let av = a.value();
    let value = index.iter().map(|&i| av[i]).collect();
    let n = a.numel();
    Ok(Tensor::from_op(
        shape.to_vec(),
        value,
        vec![a.clone()],
        Box::new(move |g, _, _| {
            let mut ga = vec![T::zero(); n];
            for (&i, &gi) in index.iter().zip(g) {
                ga[i] = ga[i] + gi;
            }
            vec![Some(ga)]
        }),
    ))
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Source offsets of a permuted view, in output order.
pub(crate) fn permute_index(shape: &[usize], axes: &[usize]) -> Vec<usize> {
    let src = strides(shape);
    let out_shape: Vec<usize> = axes.iter().map(|&a| shape[a]).collect();
    let step: Vec<usize> = axes.iter().map(|&a| src[a]).collect();
    let total = numel(shape);
    let mut index = Vec::with_capacity(total);
    let mut counter = vec![0usize; axes.len()];
    let mut offset = 0usize;
    for _ in 0..total {
        index.push(offset);
        for d in (0..axes.len()).rev() {
            counter[d] += 1;
            offset += step[d];
            if counter[d] < out_shape[d] {
                break;
            }
            offset -= step[d] * out_shape[d];
            counter[d] = 0;
        }
    }
    index
}

pub fn permute<T: Real>(a: &Tensor<T>, axes: &[usize]) -> Result<Tensor<T>> {
    let shape = a.shape();
    let mut seen = vec![false; shape.len()];
    let valid = axes.len() == shape.len()
        && axes.iter().all(|&x| x < shape.len() && !std::mem::replace(&mut seen[x], true));
    if !valid {
        return Err(mismatch("permute", format!("axes {axes:?} for shape {shape:?}")));
    }
    let out_shape: Vec<usize> = axes.iter().map(|&x| shape[x]).collect();
    gather(a, Rc::new(permute_index(shape, axes)), &out_shape)
}

/// Join along `axis`; all other dims must agree.
pub fn concat<T: Real>(parts: &[Tensor<T>], axis: usize) -> Result<Tensor<T>> {
    let first = parts.first().ok_or_else(|| mismatch("concat", "no inputs"))?;
    let base = first.shape();
    if axis >= base.len() {
        return Err(mismatch("concat", format!("axis {axis} for shape {base:?}")));
    }
    for p in parts {
        let s = p.shape();
        if s.len() != base.len() || s.iter().zip(base).enumerate().any(|(d, (x, y))| d != axis && x != y) {
            return Err(mismatch("concat", format!("{s:?} vs {base:?} along axis {axis}")));
        }
    }
    let outer: usize = base[..axis].iter().product();
    let inner: usize = base[axis + 1..].iter().product();
    let widths: Vec<usize> = parts.iter().map(|p| p.shape()[axis] * inner).collect();
    let row: usize = widths.iter().sum();
    let mut value = Vec::with_capacity(outer * row);
    for o in 0..outer {
        for (p, &w) in parts.iter().zip(&widths) {
            value.extend_from_slice(&p.value()[o * w..(o + 1) * w]);
        }
    }
    let mut shape = base.to_vec();
    shape[axis] = parts.iter().map(|p| p.shape()[axis]).sum();
    Ok(Tensor::from_op(
        shape,
        value,
        parts.to_vec(),
        Box::new(move |g, _, parents| {
            let mut out: Vec<Option<Vec<T>>> = Vec::with_capacity(widths.len());
            let mut start = 0;
            for (p, &w) in parents.iter().zip(&widths) {
                if p.requires_grad() {
                    let mut gp = Vec::with_capacity(outer * w);
                    for o in 0..outer {
                        gp.extend_from_slice(&g[o * row + start..o * row + start + w]);
                    }
                    out.push(Some(gp));
                } else {
                    out.push(None);
                }
                start += w;
            }
            out
        }),
    ))
}

/// Elements `start..end` along `axis`.
pub fn slice<T: Real>(a: &Tensor<T>, axis: usize, start: usize, end: usize) -> Result<Tensor<T>> {
    let shape = a.shape();
    if axis >= shape.len() || start >= end || end > shape[axis] {
        return Err(mismatch("slice", format!("{start}..{end} on axis {axis} of {shape:?}")));
    }
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let (row, w, off) = (shape[axis] * inner, (end - start) * inner, start * inner);
    let mut value = Vec::with_capacity(outer * w);
    for o in 0..outer {
        value.extend_from_slice(&a.value()[o * row + off..o * row + off + w]);
    }
    let mut out_shape = shape.to_vec();
    out_shape[axis] = end - start;
    let n = a.numel();
    Ok(Tensor::from_op(
        out_shape,
        value,
        vec![a.clone()],
        Box::new(move |g, _, _| {
            let mut ga = vec![T::zero(); n];
            for o in 0..outer {
                ga[o * row + off..o * row + off + w].copy_from_slice(&g[o * w..(o + 1) * w]);
            }
            vec![Some(ga)]
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permute_index_transposes() {
        assert_eq!(permute_index(&[2, 3], &[1, 0]), vec![0, 3, 1, 4, 2, 5]);
        assert_eq!(permute_index(&[2, 3, 4], &[0, 1, 2]), (0..24).collect::<Vec<_>>());
        let idx = permute_index(&[2, 3, 4], &[2, 0, 1]);
        // out[k, i, j] = in[i, j, k]
        assert_eq!(idx[(1 * 2 + 1) * 3 + 2], (1 * 3 + 2) * 4 + 1);
    }
}
