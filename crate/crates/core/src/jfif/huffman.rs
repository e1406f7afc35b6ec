//! Canonical Huffman tables (T.81 Annex C) for decoding and encoding.

use super::JfifError;

/// Code-length counts (`bits[i]` codes of length i + 1) and symbol list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HuffmanSpec {
    pub bits: [u8; 16],
    pub values: Vec<u8>,
}

pub fn annex_k_dc_luma() -> HuffmanSpec {
    HuffmanSpec {
        bits: [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0],
        values: (0..=11).collect(),
    }
}

pub fn annex_k_dc_chroma() -> HuffmanSpec {
    HuffmanSpec {
        bits: [0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0],
        values: (0..=11).collect(),
    }
}

pub fn annex_k_ac_luma() -> HuffmanSpec {
    HuffmanSpec {
        bits: [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d],
        values: vec![
            0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51,
            0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1,
            0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18,
            0x19, 0x1a, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39,
            0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57,
            0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75,
            0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92,
            0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7,
            0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3,
            0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8,
            0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2,
            0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
        ],
    }
}

pub fn annex_k_ac_chroma() -> HuffmanSpec {
    HuffmanSpec {
        bits: [0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77],
        values: vec![
            0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07,
            0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xa1, 0xb1, 0xc1, 0x09,
            0x23, 0x33, 0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25,
            0xf1, 0x17, 0x18, 0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38,
            0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56,
            0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74,
            0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
            0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5,
            0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba,
            0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6,
            0xd7, 0xd8, 0xd9, 0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf2,
            0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
        ],
    }
}

/// Decoder view: MAXCODE / VALPTR / MINCODE per code length (F.2.2.3).
#[derive(Clone, Debug)]
pub struct DecodeTable {
    maxcode: [i32; 17],
    mincode: [i32; 17],
    valptr: [usize; 17],
    values: Vec<u8>,
}

impl DecodeTable {
    pub fn new(spec: &HuffmanSpec) -> Result<Self, JfifError> {
        let total: usize = spec.bits.iter().map(|&b| b as usize).sum();
        if total != spec.values.len() || total > 256 {
            return Err(JfifError::MalformedSegment(format!(
                "huffman table declares {total} codes but lists {}",
                spec.values.len()
            )));
        }
        let mut maxcode = [-1i32; 17];
        let mut mincode = [0i32; 17];
        let mut valptr = [0usize; 17];
        let mut code = 0i32;
        let mut k = 0usize;
        for len in 1..=16 {
            let n = spec.bits[len - 1] as i32;
            if n > 0 {
                valptr[len] = k;
                mincode[len] = code;
                code += n;
                k += n as usize;
                maxcode[len] = code - 1;
                if code > (1 << len) {
                    return Err(JfifError::MalformedSegment("over-subscribed huffman table".into()));
                }
            }
            code <<= 1;
        }
        Ok(DecodeTable {
            maxcode,
            mincode,
            valptr,
            values: spec.values.clone(),
        })
    }

    /// Decode one symbol, pulling bits one at a time.
    pub fn decode(
        &self,
        mut next_bit: impl FnMut() -> Result<u32, JfifError>,
    ) -> Result<u8, JfifError> {
        let mut code = next_bit()? as i32;
        for len in 1..=16 {
            if code <= self.maxcode[len] {
                let idx = self.valptr[len] + (code - self.mincode[len]) as usize;
                return Ok(self.values[idx]);
            }
            if len == 16 {
                break;
            }
            code = (code << 1) | next_bit()? as i32;
        }
        Err(JfifError::CorruptEntropyStream("huffman code not in table".into()))
    }
}

/// Encoder view: (code, length) per symbol.
#[derive(Clone, Debug)]
pub struct EncodeTable {
    codes: [(u16, u8); 256],
}

impl EncodeTable {
    pub fn new(spec: &HuffmanSpec) -> Self {
        let mut codes = [(0u16, 0u8); 256];
        let mut code = 0u16;
        let mut k = 0;
        for len in 1..=16u8 {
            for _ in 0..spec.bits[len as usize - 1] {
                codes[spec.values[k] as usize] = (code, len);
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        EncodeTable { codes }
    }

    #[inline]
    pub fn get(&self, symbol: u8) -> (u16, u8) {
        let c = self.codes[symbol as usize];
        debug_assert!(c.1 > 0, "symbol {symbol:#x} has no code");
        c
    }
}

/// Number of magnitude bits needed for `v` (JPEG "SSSS" category).
#[inline]
pub fn category(v: i32) -> u8 {
    (32 - v.unsigned_abs().leading_zeros()) as u8
}

/// Recover a signed value from `size` raw bits (F.2.2.1 EXTEND).
#[inline]
pub fn extend(bits: u32, size: u8) -> i32 {
    if size == 0 {
        return 0;
    }
    let v = bits as i32;
    if v < (1 << (size - 1)) {
        v - (1 << size) + 1
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_symbols() {
        for spec in [annex_k_dc_luma(), annex_k_ac_luma(), annex_k_dc_chroma(), annex_k_ac_chroma()] {
            let enc = EncodeTable::new(&spec);
            let dec = DecodeTable::new(&spec).unwrap();
            for &sym in &spec.values {
                let (code, len) = enc.get(sym);
                let mut i = len;
                let got = dec
                    .decode(|| {
                        i -= 1;
                        Ok(((code >> i) & 1) as u32)
                    })
                    .unwrap();
                assert_eq!(got, sym);
            }
        }
    }

    #[test]
    fn category_and_extend_agree() {
        for v in -2047..=2047 {
            let s = category(v);
            let raw = if v < 0 { (v - 1) as u32 & ((1 << s) - 1) } else { v as u32 };
            assert_eq!(extend(raw, s), v);
        }
        assert_eq!(category(0), 0);
        assert_eq!(category(1023), 10);
        assert_eq!(category(-1024), 11);
    }
}
