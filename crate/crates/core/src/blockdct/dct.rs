//! Orthonormal 8x8 DCT-II computed as two separable 1-D passes in double
//! precision.

use std::sync::OnceLock;

pub type Block = [f64; 64];

/// `basis[k][n] = a(k) cos((2n + 1) k pi / 16)` with `a(0) = sqrt(1/8)` and
/// `a(k) = 1/2` otherwise. Rows are orthonormal.
pub fn dct_basis() -> &'static [[f64; 8]; 8] {
    static BASIS: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; 8]; 8];
        for (k, row) in m.iter_mut().enumerate() {
            let a = if k == 0 { (1.0f64 / 8.0).sqrt() } else { 0.5 };
            for (n, v) in row.iter_mut().enumerate() {
                *v = a * (((2 * n + 1) * k) as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        m
    })
}

/// Forward transform of a level-shifted block (samples minus 128).
pub fn dct2_8x8(block: &Block) -> Block {
    let c = dct_basis();
    // rows: tmp[x][v] = sum_y block[x][y] c[v][y]
    let mut tmp = [0.0; 64];
    for x in 0..8 {
        for v in 0..8 {
            let mut s = 0.0;
            for y in 0..8 {
                s += block[x * 8 + y] * c[v][y];
            }
            tmp[x * 8 + v] = s;
        }
    }
    let mut out = [0.0; 64];
    for u in 0..8 {
        for v in 0..8 {
            let mut s = 0.0;
            for x in 0..8 {
                s += c[u][x] * tmp[x * 8 + v];
            }
            out[u * 8 + v] = s;
        }
    }
    out
}

/// Inverse of [`dct2_8x8`]; output is still level shifted.
pub fn idct2_8x8(coeffs: &Block) -> Block {
    let c = dct_basis();
    let mut tmp = [0.0; 64];
    for u in 0..8 {
        for y in 0..8 {
            let mut s = 0.0;
            for v in 0..8 {
                s += coeffs[u * 8 + v] * c[v][y];
            }
            tmp[u * 8 + y] = s;
        }
    }
    let mut out = [0.0; 64];
    for x in 0..8 {
        for y in 0..8 {
            let mut s = 0.0;
            for u in 0..8 {
                s += c[u][x] * tmp[u * 8 + y];
            }
            out[x * 8 + y] = s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct double-sum definition, O(N^4) over the block.
    fn dct_bruteforce(block: &Block) -> Block {
        let pi = std::f64::consts::PI;
        let mut out = [0.0; 64];
        for u in 0..8 {
            for v in 0..8 {
                let cu = if u == 0 { 1.0 / 2f64.sqrt() } else { 1.0 };
                let cv = if v == 0 { 1.0 / 2f64.sqrt() } else { 1.0 };
                let mut s = 0.0;
                for x in 0..8 {
                    for y in 0..8 {
                        s += block[x * 8 + y]
                            * (((2 * x + 1) * u) as f64 * pi / 16.0).cos()
                            * (((2 * y + 1) * v) as f64 * pi / 16.0).cos();
                    }
                }
                out[u * 8 + v] = 0.25 * cu * cv * s;
            }
        }
        out
    }

    #[test]
    fn constant_blocks() {
        assert!(dct2_8x8(&[0.0; 64]).iter().all(|&c| c == 0.0));
        let out = dct2_8x8(&[1.0; 64]);
        assert!((out[0] - 8.0).abs() < 1e-12);
        assert!(out[1..].iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn impulse_matches_double_sum() {
        for pos in [0usize, 9, 27, 63] {
            let mut b = [0.0; 64];
            b[pos] = 1.0;
            let fast = dct2_8x8(&b);
            let slow = dct_bruteforce(&b);
            for (a, e) in fast.iter().zip(slow.iter()) {
                assert!((a - e).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn random_roundtrip_and_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let b: Block = std::array::from_fn(|_| rng.random_range(-128.0..128.0));
            let c = dct2_8x8(&b);
            let back = idct2_8x8(&c);
            let e0: f64 = b.iter().map(|v| v * v).sum();
            let e1: f64 = c.iter().map(|v| v * v).sum();
            assert!((e0.sqrt() - e1.sqrt()).abs() <= 1e-9);
            for (x, y) in b.iter().zip(back.iter()) {
                assert!((x - y).abs() <= 1e-10);
            }
        }
    }
}
