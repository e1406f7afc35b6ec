use crate::blockdct::QuantMatrix;
use crate::BLOCK;

/// Chroma sampling layout of a colour image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subsampling {
    S444,
    S420,
}

impl Subsampling {
    /// Pixel size of one minimum coded unit along each axis.
    pub fn mcu_size(self) -> usize {
        match self {
            Subsampling::S444 => BLOCK,
            Subsampling::S420 => 2 * BLOCK,
        }
    }
}

impl std::str::FromStr for Subsampling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "444" | "4:4:4" | "S444" => Ok(Subsampling::S444),
            "420" | "4:2:0" | "S420" => Ok(Subsampling::S420),
            other => Err(format!("unknown subsampling {other:?} (expected 444 or 420)")),
        }
    }
}

impl std::fmt::Display for Subsampling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Subsampling::S444 => "4:4:4",
            Subsampling::S420 => "4:2:0",
        })
    }
}

/// Integer matrix of quantized coefficients in block layout: the coefficient
/// at frequency (u, v) of block (bi, bj) lives at row `8*bi + u`, column
/// `8*bj + v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientPlane {
    pub height: usize,
    pub width: usize,
    pub data: Vec<i32>,
}

impl CoefficientPlane {
    pub fn zeros(height: usize, width: usize) -> Self {
        assert!(height % BLOCK == 0 && width % BLOCK == 0, "plane dims must be multiples of 8");
        CoefficientPlane {
            height,
            width,
            data: vec![0; height * width],
        }
    }

    pub fn blocks_high(&self) -> usize {
        self.height / BLOCK
    }

    pub fn blocks_wide(&self) -> usize {
        self.width / BLOCK
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i32 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: i32) {
        self.data[row * self.width + col] = v;
    }

    /// Block (bi, bj) in natural (raster) coefficient order.
    pub fn block(&self, bi: usize, bj: usize) -> [i32; 64] {
        let mut out = [0; 64];
        for u in 0..BLOCK {
            let row = (bi * BLOCK + u) * self.width + bj * BLOCK;
            out[u * BLOCK..(u + 1) * BLOCK].copy_from_slice(&self.data[row..row + BLOCK]);
        }
        out
    }

    pub fn set_block(&mut self, bi: usize, bj: usize, block: &[i32; 64]) {
        for u in 0..BLOCK {
            let row = (bi * BLOCK + u) * self.width + bj * BLOCK;
            self.data[row..row + BLOCK].copy_from_slice(&block[u * BLOCK..(u + 1) * BLOCK]);
        }
    }

    pub fn zero_fraction(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().filter(|&&v| v == 0).count() as f64 / self.data.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub id: u8,
    pub coeffs: CoefficientPlane,
    /// Index into [`QuantizedImage::quant_tables`].
    pub qm_index: usize,
}

/// Quantized DCT coefficients of a JPEG image plus everything needed to
/// dequantize them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedImage {
    pub components: Vec<Component>,
    pub quant_tables: Vec<QuantMatrix>,
    pub subsampling: Subsampling,
    /// (height, width) of the image before block padding.
    pub pixel_dims: (usize, usize),
}

impl QuantizedImage {
    pub fn is_gray(&self) -> bool {
        self.components.len() == 1
    }

    pub fn qm(&self, component: usize) -> &QuantMatrix {
        &self.quant_tables[self.components[component].qm_index]
    }

    /// Expected (height, width) of each component plane for the given pixel
    /// dims, channel count and subsampling.
    pub fn plane_dims(
        pixel_dims: (usize, usize),
        channels: usize,
        subsampling: Subsampling,
    ) -> Vec<(usize, usize)> {
        let (h, w) = pixel_dims;
        let up = |x: usize, m: usize| x.div_ceil(m) * m;
        if channels == 1 {
            return vec![(up(h, BLOCK), up(w, BLOCK))];
        }
        match subsampling {
            Subsampling::S444 => vec![(up(h, BLOCK), up(w, BLOCK)); channels],
            Subsampling::S420 => {
                let luma = (up(h, 16), up(w, 16));
                let chroma = (luma.0 / 2, luma.1 / 2);
                let mut v = vec![luma];
                v.extend(std::iter::repeat_n(chroma, channels - 1));
                v
            }
        }
    }

    /// Check the structural invariants; returns a description of the first
    /// violation.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.components.len();
        if n != 1 && n != 3 {
            return Err(format!("{n} components (expected 1 or 3)"));
        }
        if self.quant_tables.is_empty() || self.quant_tables.len() > 4 {
            return Err(format!("{} quantization tables", self.quant_tables.len()));
        }
        if self.pixel_dims.0 == 0 || self.pixel_dims.1 == 0 || self.pixel_dims.0 > 65535 || self.pixel_dims.1 > 65535 {
            return Err(format!("pixel dims {:?} out of range", self.pixel_dims));
        }
        let dims = Self::plane_dims(self.pixel_dims, n, self.subsampling);
        for (c, (comp, want)) in self.components.iter().zip(dims).enumerate() {
            let got = (comp.coeffs.height, comp.coeffs.width);
            if got != want {
                return Err(format!("component {c} plane {got:?}, expected {want:?}"));
            }
            if comp.coeffs.data.len() != got.0 * got.1 {
                return Err(format!("component {c} data length mismatch"));
            }
            if comp.qm_index >= self.quant_tables.len() {
                return Err(format!("component {c} references missing table {}", comp.qm_index));
            }
        }
        for qm in &self.quant_tables {
            if qm.values.iter().any(|&q| q == 0 || q > 255) {
                return Err("quantization entries must lie in [1, 255]".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_dims_follow_mcu_padding() {
        assert_eq!(
            QuantizedImage::plane_dims((17, 33), 3, Subsampling::S420),
            vec![(32, 48), (16, 24), (16, 24)]
        );
        assert_eq!(
            QuantizedImage::plane_dims((17, 33), 3, Subsampling::S444),
            vec![(24, 40); 3]
        );
        assert_eq!(QuantizedImage::plane_dims((9, 8), 1, Subsampling::S420), vec![(16, 8)]);
    }

    #[test]
    fn block_accessors_roundtrip() {
        let mut p = CoefficientPlane::zeros(16, 16);
        let b: [i32; 64] = std::array::from_fn(|i| i as i32 - 30);
        p.set_block(1, 0, &b);
        assert_eq!(p.block(1, 0), b);
        assert_eq!(p.get(8 + 1, 2), b[10]);
        assert_eq!(p.block(0, 1), [0; 64]);
    }
}
