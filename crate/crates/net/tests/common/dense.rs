//! Dense reference implementations of the two attention layers, computed
//! token by token without window partitioning or cyclic shifts.

use dctx_net::{Model, ModelConfig};

pub struct Weights {
    v: std::collections::HashMap<String, Vec<f64>>,
}

impl Weights {
    pub fn new(model: &Model) -> Self {
        let v = model
            .params
            .iter()
            .map(|p| (p.name.clone(), p.value.iter().map(|&x| x as f64).collect()))
            .collect();
        Weights { v }
    }

    pub fn get(&self, name: &str) -> &[f64] {
        &self.v[name]
    }

    /// x (rows, d_in) · w (d_in, d_out) + b
    fn linear(&self, p: &str, x: &[f64], d_in: usize) -> Vec<f64> {
        let (w, b) = (self.get(&format!("{p}.w")), self.get(&format!("{p}.b")));
        let d_out = b.len();
        let mut out = Vec::new();
        for row in x.chunks(d_in) {
            for o in 0..d_out {
                out.push(b[o] + (0..d_in).map(|i| row[i] * w[i * d_out + o]).sum::<f64>());
            }
        }
        out
    }

    /// 3x3 depthwise cross-correlation with zero padding on (c, h, w).
    fn depthwise(&self, p: &str, x: &[f64], c: usize, h: usize, w: usize) -> Vec<f64> {
        let (k, b) = (self.get(&format!("{p}.w")), self.get(&format!("{p}.b")));
        let mut out = vec![0.0; c * h * w];
        for ch in 0..c {
            for i in 0..h {
                for j in 0..w {
                    let mut s = b[ch];
                    for di in 0..3 {
                        for dj in 0..3 {
                            let (y, xx) = (i as isize + di as isize - 1, j as isize + dj as isize - 1);
                            if y >= 0 && xx >= 0 && (y as usize) < h && (xx as usize) < w {
                                s += k[ch * 9 + di * 3 + dj] * x[(ch * h + y as usize) * w + xx as usize];
                            }
                        }
                    }
                    out[(ch * h + i) * w + j] = s;
                }
            }
        }
        out
    }
}

fn softmax(row: &mut [f64]) {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = row.iter_mut().map(|v| {
        *v = (*v - m).exp();
        *v
    }).sum();
    row.iter_mut().for_each(|v| *v /= s);
}

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + dctx_autodiff::Real::erf(x / std::f64::consts::SQRT_2))
}

/// Window attention on (h, w, c) tokens, shifted variant included.
pub fn dense_window_attention(wt: &Weights, p: &str, cfg: &ModelConfig, y: &[f64], h: usize, w: usize, shifted: bool) -> Vec<f64> {
    let (c, m, d) = (cfg.embed_dim, cfg.window_size, cfg.head_dim);
    let nh = c / d;
    let s = if shifted { m / 2 } else { 0 };
    let qkv = wt.linear(&format!("{p}.qkv"), y, c);
    let table = wt.get(&format!("{p}.rpb"));
    let span = 2 * m - 1;
    // Position (r, col) of the rolled grid holds token ((r + s) % h, (col + s) % w).
    let src = |r: usize, col: usize| ((r + s) % h) * w + (col + s) % w;
    let wrapped = |r: usize, n: usize| r + s >= n;
    let mut attn_out = vec![0.0; h * w * c];
    for r in 0..h {
        for col in 0..w {
            let (wr, wc) = (r / m * m, col / m * m);
            let a = src(r, col);
            for head in 0..nh {
                let mut scores = Vec::new();
                let mut keys = Vec::new();
                for kr in wr..wr + m {
                    for kc in wc..wc + m {
                        let b = src(kr, kc);
                        let dot: f64 = (0..d)
                            .map(|i| qkv[a * 3 * c + head * d + i] * qkv[b * 3 * c + c + head * d + i])
                            .sum();
                        let dy = r + m - 1 - kr;
                        let dx = col + m - 1 - kc;
                        let mut sc = dot / (d as f64).sqrt() + table[(dy * span + dx) * nh + head];
                        if wrapped(r, h) != wrapped(kr, h) || wrapped(col, w) != wrapped(kc, w) {
                            sc -= 100.0;
                        }
                        scores.push(sc);
                        keys.push(b);
                    }
                }
                softmax(&mut scores);
                for i in 0..d {
                    attn_out[a * c + head * d + i] = scores
                        .iter()
                        .zip(&keys)
                        .map(|(pw, &b)| pw * qkv[b * 3 * c + 2 * c + head * d + i])
                        .sum();
                }
            }
        }
    }
    wt.linear(&format!("{p}.proj"), &attn_out, c)
}

pub fn dense_channel_attention(wt: &Weights, p: &str, cfg: &ModelConfig, y: &[f64], h: usize, w: usize) -> Vec<f64> {
    let (c, d) = (cfg.embed_dim, cfg.head_dim);
    let nh = c / d;
    let hw = h * w;
    let map: Vec<f64> = (0..c).flat_map(|ch| (0..hw).map(move |t| (ch, t))).map(|(ch, t)| y[t * c + ch]).collect();
    let pe = wt.depthwise(&format!("{p}.pe1"), &map, c, h, w);
    let pe: Vec<f64> = pe.into_iter().map(gelu).collect();
    let pe = wt.depthwise(&format!("{p}.pe2"), &pe, c, h, w);
    let z: Vec<f64> = (0..hw * c).map(|i| y[i] + pe[(i % c) * hw + i / c]).collect();
    let qkv = wt.linear(&format!("{p}.qkv"), &z, c);
    let at = |t: usize, part: usize, ch: usize| qkv[t * 3 * c + part * c + ch];
    let mut out = vec![0.0; hw * c];
    for head in 0..nh {
        for i in 0..d {
            let qi = head * d + i;
            let mut scores: Vec<f64> = (0..d)
                .map(|j| (0..hw).map(|t| at(t, 0, qi) * at(t, 1, head * d + j)).sum::<f64>() / (hw as f64).sqrt())
                .collect();
            softmax(&mut scores);
            for t in 0..hw {
                out[t * c + qi] = (0..d).map(|j| scores[j] * at(t, 2, head * d + j)).sum();
            }
        }
    }
    wt.linear(&format!("{p}.proj"), &out, c)
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
