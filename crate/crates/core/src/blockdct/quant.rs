//! Quantization tables and IJG quality scaling.

use super::dct::Block;
use super::BlockDctError;

/// Luminance table from ITU-T T.81 Annex K.1, natural order.
pub const ANNEX_K_LUMA: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Chrominance table from ITU-T T.81 Annex K.1, natural order.
pub const ANNEX_K_CHROMA: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99, //
    18, 21, 26, 66, 99, 99, 99, 99, //
    24, 26, 56, 99, 99, 99, 99, 99, //
    47, 66, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComponentKind {
    Luma,
    Chroma,
}

/// 8x8 quantizer divisors in natural (raster) order, each in [1, 255].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuantMatrix {
    pub values: [u16; 64],
    pub kind: ComponentKind,
}

impl QuantMatrix {
    pub fn new(values: [u16; 64], kind: ComponentKind) -> Self {
        debug_assert!(values.iter().all(|&q| (1..=255).contains(&q)));
        QuantMatrix { values, kind }
    }

    pub fn ones(kind: ComponentKind) -> Self {
        QuantMatrix::new([1; 64], kind)
    }

    #[inline]
    pub fn at(&self, u: usize, v: usize) -> u16 {
        self.values[u * 8 + v]
    }

    pub fn as_f64(&self) -> [f64; 64] {
        std::array::from_fn(|i| self.values[i] as f64)
    }

    /// Quality factor whose IJG table reproduces this matrix exactly, if any.
    pub fn estimate_qf(&self) -> Option<u32> {
        (1..=100).find(|&qf| qf_to_qm(qf, self.kind).map(|m| m.values == self.values).unwrap_or(false))
    }
}

/// IJG scaling of the Annex K base table for `qf` in 1..=100.
pub fn qf_to_qm(qf: u32, kind: ComponentKind) -> Result<QuantMatrix, BlockDctError> {
    if !(1..=100).contains(&qf) {
        return Err(BlockDctError::QfOutOfRange(qf));
    }
    let scale = if qf < 50 { 5000 / qf } else { 200 - 2 * qf };
    let base = match kind {
        ComponentKind::Luma => &ANNEX_K_LUMA,
        ComponentKind::Chroma => &ANNEX_K_CHROMA,
    };
    let values = std::array::from_fn(|i| ((base[i] as u32 * scale + 50) / 100).clamp(1, 255) as u16);
    Ok(QuantMatrix { values, kind })
}

/// `round(c / q)` with ties away from zero.
pub fn quantize(coeffs: &Block, qm: &QuantMatrix) -> [i32; 64] {
    std::array::from_fn(|i| (coeffs[i] / qm.values[i] as f64).round() as i32)
}

pub fn dequantize(q: &[i32; 64], qm: &QuantMatrix) -> Block {
    std::array::from_fn(|i| q[i] as f64 * qm.values[i] as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ijg_scaling_examples() {
        let q50 = qf_to_qm(50, ComponentKind::Luma).unwrap();
        assert_eq!(q50.values, ANNEX_K_LUMA);
        assert_eq!(q50.at(0, 0), 16);
        for kind in [ComponentKind::Luma, ComponentKind::Chroma] {
            assert_eq!(qf_to_qm(100, kind).unwrap().values, [1; 64]);
        }
        assert_eq!(qf_to_qm(10, ComponentKind::Luma).unwrap().at(0, 0), 80);
        assert_eq!(qf_to_qm(0, ComponentKind::Luma), Err(BlockDctError::QfOutOfRange(0)));
        assert_eq!(qf_to_qm(101, ComponentKind::Chroma), Err(BlockDctError::QfOutOfRange(101)));
    }

    #[test]
    fn estimate_qf_inverts_scaling() {
        for qf in [5, 10, 37, 50, 75, 90, 100] {
            let m = qf_to_qm(qf, ComponentKind::Luma).unwrap();
            let back = m.estimate_qf().unwrap();
            assert_eq!(qf_to_qm(back, ComponentKind::Luma).unwrap(), m);
        }
    }

    #[test]
    fn quantize_examples() {
        let qm = QuantMatrix::new([80; 64], ComponentKind::Luma);
        let mut c = [0.0; 64];
        c[0] = 80.0;
        c[1] = 39.0;
        c[2] = -40.0;
        let q = quantize(&c, &qm);
        assert_eq!(q[0], 1);
        assert_eq!(dequantize(&q, &qm)[0], 80.0);
        assert_eq!(q[1], 0);
        // half-way ties round away from zero
        assert_eq!(q[2], -1);
    }

    #[test]
    fn quantization_error_bounded_by_half_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let qf = rng.random_range(1..=100);
            let qm = qf_to_qm(qf, ComponentKind::Luma).unwrap();
            let c: Block = std::array::from_fn(|_| rng.random_range(-1024.0..1024.0));
            let d = dequantize(&quantize(&c, &qm), &qm);
            for i in 0..64 {
                assert!((c[i] - d[i]).abs() <= 0.5 * qm.values[i] as f64);
            }
        }
    }
}
