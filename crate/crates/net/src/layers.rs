//! Building blocks of the network. Each layer has a `*_params` function
//! registering its parameters under a name prefix and a forward function
//! reading them back from a [`ParamSet`]. Feature maps are (C, H, W);
//! attention branches work on (H, W, C) token grids.

use std::rc::Rc;

use dctx_autodiff::{self as ad, Init, ParamSet, ParamStore, Real, Tensor};
use rand_chacha::ChaCha8Rng;

use crate::{Ablation, ModelConfig, NetError, Result};

const LN_EPS: f64 = 1e-5;
const LINEAR_STD: f64 = 0.02;
/// Additive attention mask for token pairs from different shifted regions.
pub const MASK_VALUE: f64 = -100.0;

pub(crate) struct Registry<'a> {
    pub store: &'a mut ParamStore,
    pub rng: &'a mut ChaCha8Rng,
}

impl Registry<'_> {
    fn add(&mut self, name: String, shape: &[usize], init: Init) -> Result<()> {
        self.store.add(&name, shape, init, self.rng)?;
        Ok(())
    }

    pub fn linear(&mut self, p: &str, d_in: usize, d_out: usize) -> Result<()> {
        self.add(format!("{p}.w"), &[d_in, d_out], Init::TruncNormal(LINEAR_STD))?;
        self.add(format!("{p}.b"), &[d_out], Init::Zero)
    }

    pub fn norm(&mut self, p: &str, d: usize) -> Result<()> {
        self.add(format!("{p}.g"), &[d], Init::One)?;
        self.add(format!("{p}.b"), &[d], Init::Zero)
    }

    pub fn conv(&mut self, p: &str, c_in: usize, c_out: usize, k: usize) -> Result<()> {
        let fan_in = c_in * k * k;
        self.add(format!("{p}.w"), &[c_out, c_in, k, k], Init::Uniform { fan_in })?;
        self.add(format!("{p}.b"), &[c_out], Init::Zero)
    }

    pub fn zero_conv(&mut self, p: &str, c_in: usize, c_out: usize, k: usize) -> Result<()> {
        self.add(format!("{p}.w"), &[c_out, c_in, k, k], Init::Zero)?;
        self.add(format!("{p}.b"), &[c_out], Init::Zero)
    }

    pub fn depthwise(&mut self, p: &str, c: usize) -> Result<()> {
        self.add(format!("{p}.w"), &[c, 1, 3, 3], Init::Uniform { fan_in: 9 })?;
        self.add(format!("{p}.b"), &[c], Init::Zero)
    }

    pub fn transpose(&mut self, p: &str, c_in: usize, c_out: usize) -> Result<()> {
        self.add(format!("{p}.w"), &[c_in, c_out, 2, 2], Init::Uniform { fan_in: c_in * 4 })?;
        self.add(format!("{p}.b"), &[c_out], Init::Zero)
    }

    pub fn table(&mut self, name: String, shape: &[usize]) -> Result<()> {
        self.add(name, shape, Init::TruncNormal(LINEAR_STD))
    }
}

fn w<'a, T: Real>(ps: &'a ParamSet<T>, p: &str) -> &'a Tensor<T> {
    ps.get(&format!("{p}.w"))
}

fn b<'a, T: Real>(ps: &'a ParamSet<T>, p: &str) -> &'a Tensor<T> {
    ps.get(&format!("{p}.b"))
}

pub fn linear<T: Real>(ps: &ParamSet<T>, p: &str, x: &Tensor<T>) -> Result<Tensor<T>> {
    Ok(ad::add(&ad::matmul(x, w(ps, p))?, b(ps, p))?)
}

pub fn norm<T: Real>(ps: &ParamSet<T>, p: &str, x: &Tensor<T>) -> Result<Tensor<T>> {
    let n = ad::layer_norm(x, LN_EPS)?;
    Ok(ad::add(&ad::mul(&n, ps.get(&format!("{p}.g")))?, b(ps, p))?)
}

pub fn conv<T: Real>(ps: &ParamSet<T>, p: &str, x: &Tensor<T>) -> Result<Tensor<T>> {
    Ok(ad::conv2d(x, w(ps, p), Some(b(ps, p)))?)
}

pub fn depthwise<T: Real>(ps: &ParamSet<T>, p: &str, x: &Tensor<T>) -> Result<Tensor<T>> {
    Ok(ad::depthwise_conv2d(x, w(ps, p), Some(b(ps, p)))?)
}

pub fn transpose<T: Real>(ps: &ParamSet<T>, p: &str, x: &Tensor<T>) -> Result<Tensor<T>> {
    Ok(ad::transpose_conv2d(x, w(ps, p), Some(b(ps, p)))?)
}

/// (C, H, W) -> (H, W, C)
pub fn to_tokens<T: Real>(x: &Tensor<T>) -> Result<Tensor<T>> {
    Ok(ad::permute(x, &[1, 2, 0])?)
}

/// (H, W, C) -> (C, H, W)
pub fn to_map<T: Real>(x: &Tensor<T>) -> Result<Tensor<T>> {
    Ok(ad::permute(x, &[2, 0, 1])?)
}

fn grid<T: Real>(x: &Tensor<T>) -> (usize, usize, usize) {
    match *x.shape() {
        [h, w, c] => (h, w, c),
        _ => panic!("expected an (H, W, C) token grid, got {:?}", x.shape()),
    }
}

fn mlp_params(r: &mut Registry, p: &str, cfg: &ModelConfig) -> Result<()> {
    let c = cfg.embed_dim;
    r.linear(&format!("{p}.fc1"), c, c * cfg.mlp_ratio)?;
    r.linear(&format!("{p}.fc2"), c * cfg.mlp_ratio, c)
}

pub fn mlp<T: Real>(ps: &ParamSet<T>, p: &str, x: &Tensor<T>) -> Result<Tensor<T>> {
    let h = ad::gelu(&linear(ps, &format!("{p}.fc1"), x)?);
    linear(ps, &format!("{p}.fc2"), &h)
}

/// Index into the flattened ((2M-1)^2, heads) bias table for every
/// (head, query, key) triple of one window.
pub fn relative_position_index(m: usize, heads: usize) -> Vec<usize> {
    let span = 2 * m - 1;
    let n = m * m;
    let mut idx = Vec::with_capacity(heads * n * n);
    for h in 0..heads {
        for i in 0..n {
            for j in 0..n {
                let dy = i / m + m - 1 - j / m;
                let dx = i % m + m - 1 - j % m;
                idx.push((dy * span + dx) * heads + h);
            }
        }
    }
    idx
}

/// Additive mask (windows, M², M²) for attention after shifting an h x w
/// grid by M/2: tokens that were not neighbours before the roll do not
/// attend to each other.
pub fn shift_mask(h: usize, w: usize, m: usize) -> Vec<f64> {
    let s = m / 2;
    let region = |x: usize, n: usize| usize::from(x >= n - m) + usize::from(x >= n - s);
    let label = |i: usize, j: usize| region(i, h) * 3 + region(j, w);
    let (nh, nw) = (h / m, w / m);
    let mut mask = Vec::with_capacity(nh * nw * m.pow(4));
    for win in 0..nh * nw {
        let (wi, wj) = (win / nw, win % nw);
        let at = |t: usize| label(wi * m + t / m, wj * m + t % m);
        for a in 0..m * m {
            for bb in 0..m * m {
                mask.push(if at(a) == at(bb) { 0.0 } else { MASK_VALUE });
            }
        }
    }
    mask
}

fn window_attention_params(r: &mut Registry, p: &str, cfg: &ModelConfig) -> Result<()> {
    let c = cfg.embed_dim;
    let span = 2 * cfg.window_size - 1;
    r.linear(&format!("{p}.qkv"), c, 3 * c)?;
    r.table(format!("{p}.rpb"), &[span * span, cfg.heads()])?;
    r.linear(&format!("{p}.proj"), c, c)
}

/// Multi-head self-attention inside M x M windows of an (H, W, C) grid,
/// optionally on the grid rolled by -M/2.
pub fn window_attention<T: Real>(
    ps: &ParamSet<T>,
    p: &str,
    cfg: &ModelConfig,
    y: &Tensor<T>,
    shifted: bool,
) -> Result<Tensor<T>> {
    let (h, wd, c) = grid(y);
    let m = cfg.window_size;
    if h % m != 0 || wd % m != 0 {
        return Err(NetError::DimNotDivisibleByWindow { h, w: wd, m });
    }
    let (nh, d) = (cfg.heads(), cfg.head_dim);
    let n = m * m;
    let nw = (h / m) * (wd / m);
    let s = (m / 2) as isize;

    let rolled = if shifted { ad::cyclic_shift(y, -s)? } else { y.clone() };
    let windows = ad::window_partition(&rolled, m)?;
    let qkv = linear(ps, &format!("{p}.qkv"), &windows)?;
    let qkv = ad::reshape(&qkv, &[nw, n, 3, nh, d])?;
    let qkv = ad::permute(&qkv, &[2, 0, 3, 1, 4])?;
    let part = |i: usize| -> Result<Tensor<T>> {
        Ok(ad::reshape(&ad::slice(&qkv, 0, i, i + 1)?, &[nw * nh, n, d])?)
    };
    let (q, k, v) = (part(0)?, part(1)?, part(2)?);

    let scores = ad::scale(&ad::bmm(&q, &k, true)?, 1.0 / (d as f64).sqrt());
    let scores = ad::reshape(&scores, &[nw, nh, n, n])?;
    let bias = ad::gather(
        ps.get(&format!("{p}.rpb")),
        Rc::new(relative_position_index(m, nh)),
        &[nh, n, n],
    )?;
    let mut scores = ad::add(&scores, &bias)?;
    if shifted {
        let mask: Vec<T> = shift_mask(h, wd, m)
            .chunks(n * n)
            .flat_map(|win| std::iter::repeat_n(win, nh).flatten().map(|&v| T::c(v)))
            .collect();
        scores = ad::add(&scores, &Tensor::new(&[nw, nh, n, n], mask)?)?;
    }
    let attn = ad::reshape(&ad::softmax(&scores)?, &[nw * nh, n, n])?;
    let out = ad::bmm(&attn, &v, false)?;
    let out = ad::reshape(&ad::permute(&ad::reshape(&out, &[nw, nh, n, d])?, &[0, 2, 1, 3])?, &[nw, n, c])?;
    let out = linear(ps, &format!("{p}.proj"), &out)?;
    let out = ad::window_reverse(&out, m, h, wd)?;
    Ok(if shifted { ad::cyclic_shift(&out, s)? } else { out })
}

fn channel_attention_params(r: &mut Registry, p: &str, cfg: &ModelConfig) -> Result<()> {
    let c = cfg.embed_dim;
    r.depthwise(&format!("{p}.pe1"), c)?;
    r.depthwise(&format!("{p}.pe2"), c)?;
    r.linear(&format!("{p}.qkv"), c, 3 * c)?;
    r.linear(&format!("{p}.proj"), c, c)
}

/// Channel-token self-attention over an (H, W, C) grid: each channel's H·W
/// values form one token; heads split the channels into groups of
/// `head_dim`.
pub fn channel_attention<T: Real>(ps: &ParamSet<T>, p: &str, cfg: &ModelConfig, y: &Tensor<T>) -> Result<Tensor<T>> {
    let (h, wd, c) = grid(y);
    let (nh, d) = (cfg.heads(), cfg.head_dim);
    let hw = h * wd;
    let pe = depthwise(ps, &format!("{p}.pe1"), &to_map(y)?)?;
    let pe = depthwise(ps, &format!("{p}.pe2"), &ad::gelu(&pe))?;
    let z = ad::add(y, &to_tokens(&pe)?)?;
    let qkv = linear(ps, &format!("{p}.qkv"), &ad::reshape(&z, &[hw, c])?)?;
    let qkv = ad::permute(&ad::reshape(&qkv, &[hw, 3, nh, d])?, &[1, 2, 3, 0])?;
    let part = |i: usize| -> Result<Tensor<T>> {
        Ok(ad::reshape(&ad::slice(&qkv, 0, i, i + 1)?, &[nh, d, hw])?)
    };
    let (q, k, v) = (part(0)?, part(1)?, part(2)?);
    let scores = ad::scale(&ad::bmm(&q, &k, true)?, 1.0 / (hw as f64).sqrt());
    let attn = ad::softmax(&scores)?;
    let out = ad::bmm(&attn, &v, false)?;
    let out = ad::permute(&ad::reshape(&out, &[c, hw])?, &[1, 0])?;
    let out = linear(ps, &format!("{p}.proj"), &out)?;
    Ok(ad::reshape(&out, &[h, wd, c])?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Spatial,
    Frequential,
}

pub(crate) fn branch_params(r: &mut Registry, p: &str, cfg: &ModelConfig, kind: Branch) -> Result<()> {
    let c = cfg.embed_dim;
    r.norm(&format!("{p}.norm1"), c)?;
    match kind {
        Branch::Spatial => window_attention_params(r, &format!("{p}.attn"), cfg)?,
        Branch::Frequential => channel_attention_params(r, &format!("{p}.attn"), cfg)?,
    }
    r.norm(&format!("{p}.norm2"), c)?;
    mlp_params(r, &format!("{p}.mlp"), cfg)
}

/// Pre-norm transformer branch: attention and MLP, each with a residual.
pub fn branch<T: Real>(
    ps: &ParamSet<T>,
    p: &str,
    cfg: &ModelConfig,
    kind: Branch,
    x: &Tensor<T>,
    shifted: bool,
) -> Result<Tensor<T>> {
    let y = norm(ps, &format!("{p}.norm1"), x)?;
    let a = match kind {
        Branch::Spatial => window_attention(ps, &format!("{p}.attn"), cfg, &y, shifted)?,
        Branch::Frequential => channel_attention(ps, &format!("{p}.attn"), cfg, &y)?,
    };
    let x1 = ad::add(x, &a)?;
    let m = mlp(ps, &format!("{p}.mlp"), &norm(ps, &format!("{p}.norm2"), &x1)?)?;
    Ok(ad::add(&x1, &m)?)
}

fn branch_kinds(a: Ablation) -> [Branch; 2] {
    match a {
        Ablation::ParallelSpatial => [Branch::Spatial, Branch::Spatial],
        Ablation::ParallelFrequential => [Branch::Frequential, Branch::Frequential],
        _ => [Branch::Spatial, Branch::Frequential],
    }
}

pub(crate) fn sftb_params(r: &mut Registry, p: &str, cfg: &ModelConfig) -> Result<()> {
    let c = cfg.embed_dim;
    let [k0, k1] = branch_kinds(cfg.ablation);
    branch_params(r, &format!("{p}.b0"), cfg, k0)?;
    branch_params(r, &format!("{p}.b1"), cfg, k1)?;
    match cfg.ablation {
        Ablation::Successive => Ok(()),
        Ablation::AddFusion => r.conv(&format!("{p}.fuse"), c, c, 3),
        Ablation::ConcatNoConv => r.conv(&format!("{p}.fuse"), 2 * c, c, 1),
        _ => r.conv(&format!("{p}.fuse"), 2 * c, c, 3),
    }
}

/// Spatial-frequential transformer block on a (C, H, W) map. Odd `index`
/// within a block uses shifted windows.
pub fn sftb<T: Real>(ps: &ParamSet<T>, p: &str, cfg: &ModelConfig, x: &Tensor<T>, index: usize) -> Result<Tensor<T>> {
    let t = to_tokens(x)?;
    let shifted = index % 2 == 1;
    let [k0, k1] = branch_kinds(cfg.ablation);
    let (p0, p1) = (format!("{p}.b0"), format!("{p}.b1"));
    if cfg.ablation == Ablation::Successive {
        let s = branch(ps, &p0, cfg, k0, &t, shifted)?;
        return to_map(&branch(ps, &p1, cfg, k1, &s, shifted)?);
    }
    let a = ad::add(&branch(ps, &p0, cfg, k0, &t, shifted)?, &t)?;
    let f = ad::add(&branch(ps, &p1, cfg, k1, &t, shifted)?, &t)?;
    let fused = if cfg.ablation == Ablation::AddFusion {
        ad::add(&a, &f)?
    } else {
        ad::concat(&[a, f], 2)?
    };
    conv(ps, &format!("{p}.fuse"), &to_map(&fused)?)
}

pub(crate) fn block_params(r: &mut Registry, p: &str, cfg: &ModelConfig) -> Result<()> {
    for j in 0..cfg.sftbs_per_block {
        sftb_params(r, &format!("{p}.sftb{j}"), cfg)?;
    }
    let c = cfg.embed_dim;
    r.conv(&format!("{p}.conv"), c, c, 3)
}

/// K SFTBs, a 3x3 conv, and a residual from the block input.
pub fn block<T: Real>(ps: &ParamSet<T>, p: &str, cfg: &ModelConfig, x: &Tensor<T>) -> Result<Tensor<T>> {
    let mut f = x.clone();
    for j in 0..cfg.sftbs_per_block {
        f = sftb(ps, &format!("{p}.sftb{j}"), cfg, &f, j)?;
    }
    Ok(ad::add(&conv(ps, &format!("{p}.conv"), &f)?, x)?)
}

pub(crate) fn head_params(r: &mut Registry, cfg: &ModelConfig) -> Result<()> {
    let (c, cin) = (cfg.embed_dim, cfg.input_channels());
    r.conv("head.y", cin, c, 3)?;
    if cfg.grayscale {
        return r.conv("head.cat", c, c, 3);
    }
    for comp in ["cb", "cr"] {
        r.conv(&format!("head.{comp}"), cin, c, 3)?;
        match cfg.chroma {
            dctx_core::Subsampling::S420 => r.transpose(&format!("head.{comp}_up"), c, c)?,
            dctx_core::Subsampling::S444 => r.conv(&format!("head.{comp}_up"), c, c, 3)?,
        }
    }
    r.conv("head.cat", 3 * c, c, 3)
}

/// Luminance-chrominance alignment: per-component convs, chroma brought to
/// luma resolution, concatenation fused by a 3x3 conv.
pub fn alignment_head<T: Real>(ps: &ParamSet<T>, cfg: &ModelConfig, maps: &[Tensor<T>]) -> Result<Tensor<T>> {
    let y = conv(ps, "head.y", &maps[0])?;
    if cfg.grayscale {
        return conv(ps, "head.cat", &y);
    }
    if maps.len() != 3 {
        return Err(NetError::DimMismatch(format!("{} component maps, expected 3", maps.len())));
    }
    let mut parts = vec![y];
    for (comp, map) in ["cb", "cr"].iter().zip(&maps[1..]) {
        let f = conv(ps, &format!("head.{comp}"), map)?;
        let up = match cfg.chroma {
            dctx_core::Subsampling::S420 => transpose(ps, &format!("head.{comp}_up"), &f)?,
            dctx_core::Subsampling::S444 => conv(ps, &format!("head.{comp}_up"), &f)?,
        };
        if up.shape()[1..] != parts[0].shape()[1..] {
            return Err(NetError::DimMismatch(format!(
                "chroma features {:?} do not align with luma {:?}",
                up.shape(),
                parts[0].shape()
            )));
        }
        parts.push(up);
    }
    conv(ps, "head.cat", &ad::concat(&parts, 0)?)
}
