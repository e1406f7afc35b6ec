//! Window partitioning and cyclic shifts of (H, W, C) token grids, all
//! expressed as index gathers.

use std::rc::Rc;

use super::shape::gather;
use crate::error::mismatch;
use crate::{Real, Result, Tensor};

fn grid<T: Real>(op: &'static str, x: &Tensor<T>) -> Result<(usize, usize, usize)> {
    match *x.shape() {
        [h, w, c] => Ok((h, w, c)),
        _ => Err(mismatch(op, format!("input must be (H, W, C), got {:?}", x.shape()))),
    }
}

/// Expand a per-site source map to per-element offsets.
fn expand(sites: impl Iterator<Item = usize>, c: usize) -> Rc<Vec<usize>> {
    Rc::new(sites.flat_map(|s| (0..c).map(move |k| s * c + k)).collect())
}

/// (H, W, C) -> (H/m · W/m, m·m, C), windows and tokens in raster order.
pub fn window_partition<T: Real>(x: &Tensor<T>, m: usize) -> Result<Tensor<T>> {
    let (h, w, c) = grid("window_partition", x)?;
    if m == 0 || h % m != 0 || w % m != 0 {
        return Err(mismatch("window_partition", format!("{h}x{w} not divisible by window {m}")));
    }
    let (nh, nw) = (h / m, w / m);
    let sites = (0..nh * nw).flat_map(move |win| {
        let (wi, wj) = (win / nw, win % nw);
        (0..m * m).map(move |t| (wi * m + t / m) * w + wj * m + t % m)
    });
    gather(x, expand(sites, c), &[nh * nw, m * m, c])
}

/// Inverse of [`window_partition`] for an `h` x `w` grid.
pub fn window_reverse<T: Real>(x: &Tensor<T>, m: usize, h: usize, w: usize) -> Result<Tensor<T>> {
    let c = match *x.shape() {
        [n, t, c] if m > 0 && h % m == 0 && w % m == 0 && n == (h / m) * (w / m) && t == m * m => c,
        _ => {
            return Err(mismatch(
                "window_reverse",
                format!("{:?} is not a window stack for {h}x{w}, m = {m}", x.shape()),
            ))
        }
    };
    let nw = w / m;
    let sites = (0..h * w).map(move |s| {
        let (i, j) = (s / w, s % w);
        ((i / m) * nw + j / m) * m * m + (i % m) * m + j % m
    });
    gather(x, expand(sites, c), &[h, w, c])
}

/// Roll both spatial axes by `shift` (positive moves content towards higher
/// indices), wrapping around.
pub fn cyclic_shift<T: Real>(x: &Tensor<T>, shift: isize) -> Result<Tensor<T>> {
    let (h, w, c) = grid("cyclic_shift", x)?;
    let sites = (0..h * w).map(move |s| {
        let (i, j) = ((s / w) as isize, (s % w) as isize);
        let si = (i - shift).rem_euclid(h as isize) as usize;
        let sj = (j - shift).rem_euclid(w as isize) as usize;
        si * w + sj
    });
    gather(x, expand(sites, c), &[h, w, c])
}
