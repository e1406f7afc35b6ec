use super::huffman::{
    annex_k_ac_chroma, annex_k_ac_luma, annex_k_dc_chroma, annex_k_dc_luma, category, EncodeTable,
    HuffmanSpec,
};
use super::{marker, JfifError, ZIGZAG};
use crate::quantized::{QuantizedImage, Subsampling};

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    fn new(out: Vec<u8>) -> Self {
        BitWriter { out, acc: 0, nbits: 0 }
    }

    fn put(&mut self, bits: u32, len: u8) {
        if len == 0 {
            return;
        }
        self.acc = (self.acc << len) | (bits & ((1 << len) - 1));
        self.nbits += len as u32;
        while self.nbits >= 8 {
            self.nbits -= 8;
            let byte = (self.acc >> self.nbits) as u8;
            self.out.push(byte);
            if byte == 0xFF {
                self.out.push(0x00);
            }
        }
        self.acc &= (1 << self.nbits) - 1;
    }

    fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            let pad = 8 - self.nbits as u8;
            self.put((1 << pad) - 1, pad);
        }
        self.out
    }
}

fn put_segment(out: &mut Vec<u8>, code: u8, payload: &[u8]) {
    out.extend_from_slice(&[0xFF, code]);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

fn dht_payload(class: u8, id: u8, spec: &HuffmanSpec) -> Vec<u8> {
    let mut p = vec![(class << 4) | id];
    p.extend_from_slice(&spec.bits);
    p.extend_from_slice(&spec.values);
    p
}

struct Tables {
    dc: EncodeTable,
    ac: EncodeTable,
}

fn encode_block(
    w: &mut BitWriter,
    block: &[i32; 64],
    pred: &mut i32,
    t: &Tables,
) -> Result<(), JfifError> {
    let diff = block[0] - *pred;
    *pred = block[0];
    let s = category(diff);
    if s > 11 {
        return Err(JfifError::RangeOverflow { value: diff, max_bits: 11 });
    }
    let (code, len) = t.dc.get(s);
    w.put(code as u32, len);
    w.put(if diff < 0 { (diff - 1) as u32 } else { diff as u32 }, s);

    let mut run = 0u8;
    for &n in &ZIGZAG[1..] {
        let v = block[n];
        if v == 0 {
            run += 1;
            continue;
        }
        while run >= 16 {
            let (code, len) = t.ac.get(0xF0);
            w.put(code as u32, len);
            run -= 16;
        }
        let s = category(v);
        if s > 10 {
            return Err(JfifError::RangeOverflow { value: v, max_bits: 10 });
        }
        let (code, len) = t.ac.get((run << 4) | s);
        w.put(code as u32, len);
        w.put(if v < 0 { (v - 1) as u32 } else { v as u32 }, s);
        run = 0;
    }
    if run > 0 {
        let (code, len) = t.ac.get(0x00);
        w.put(code as u32, len);
    }
    Ok(())
}

/// Serialize quantized coefficients as a baseline JFIF file using the
/// Annex K Huffman tables.
pub fn encode_jpeg(img: &QuantizedImage) -> Result<Vec<u8>, JfifError> {
    img.validate().map_err(JfifError::InvalidImage)?;
    let n = img.components.len();
    let (h, w) = img.pixel_dims;
    let mut out = vec![0xFF, marker::SOI];
    put_segment(&mut out, marker::APP0, b"JFIF\0\x01\x01\x00\x00\x01\x00\x01\x00\x00");

    for (i, qm) in img.quant_tables.iter().enumerate() {
        let mut p = vec![i as u8];
        p.extend(ZIGZAG.iter().map(|&k| qm.values[k] as u8));
        put_segment(&mut out, marker::DQT, &p);
    }

    let mut sof = vec![8];
    sof.extend_from_slice(&(h as u16).to_be_bytes());
    sof.extend_from_slice(&(w as u16).to_be_bytes());
    sof.push(n as u8);
    for (c, comp) in img.components.iter().enumerate() {
        let factors = if c == 0 && n == 3 && img.subsampling == Subsampling::S420 { 0x22 } else { 0x11 };
        sof.extend_from_slice(&[comp.id, factors, comp.qm_index as u8]);
    }
    put_segment(&mut out, marker::SOF0, &sof);

    put_segment(&mut out, marker::DHT, &dht_payload(0, 0, &annex_k_dc_luma()));
    put_segment(&mut out, marker::DHT, &dht_payload(1, 0, &annex_k_ac_luma()));
    if n > 1 {
        put_segment(&mut out, marker::DHT, &dht_payload(0, 1, &annex_k_dc_chroma()));
        put_segment(&mut out, marker::DHT, &dht_payload(1, 1, &annex_k_ac_chroma()));
    }

    let mut sos = vec![n as u8];
    for (c, comp) in img.components.iter().enumerate() {
        sos.extend_from_slice(&[comp.id, if c == 0 { 0x00 } else { 0x11 }]);
    }
    sos.extend_from_slice(&[0, 63, 0]);
    put_segment(&mut out, marker::SOS, &sos);

    let luma = Tables {
        dc: EncodeTable::new(&annex_k_dc_luma()),
        ac: EncodeTable::new(&annex_k_ac_luma()),
    };
    let chroma = Tables {
        dc: EncodeTable::new(&annex_k_dc_chroma()),
        ac: EncodeTable::new(&annex_k_ac_chroma()),
    };
    let mut writer = BitWriter::new(out);
    let mut preds = vec![0i32; n];
    if n == 1 {
        let plane = &img.components[0].coeffs;
        for bi in 0..plane.blocks_high() {
            for bj in 0..plane.blocks_wide() {
                encode_block(&mut writer, &plane.block(bi, bj), &mut preds[0], &luma)?;
            }
        }
    } else {
        let f = if img.subsampling == Subsampling::S420 { 2 } else { 1 };
        let luma_plane = &img.components[0].coeffs;
        let (mh, mw) = (luma_plane.blocks_high() / f, luma_plane.blocks_wide() / f);
        for mr in 0..mh {
            for mc in 0..mw {
                for dy in 0..f {
                    for dx in 0..f {
                        let b = luma_plane.block(mr * f + dy, mc * f + dx);
                        encode_block(&mut writer, &b, &mut preds[0], &luma)?;
                    }
                }
                for c in 1..n {
                    let b = img.components[c].coeffs.block(mr, mc);
                    encode_block(&mut writer, &b, &mut preds[c], &chroma)?;
                }
            }
        }
    }
    let mut out = writer.finish();
    out.extend_from_slice(&[0xFF, marker::EOI]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::parse_jpeg;
    use super::*;
    use crate::blockdct::{compress, qf_to_qm, ComponentKind};
    use crate::pixels::{ColorSpace, PixelImage, Plane};
    use crate::quantized::{CoefficientPlane, Component};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut ChaCha8Rng) -> QuantizedImage {
        let gray = rng.random_bool(0.25);
        let subsampling = if !gray && rng.random_bool(0.5) { Subsampling::S420 } else { Subsampling::S444 };
        let dims = (rng.random_range(1..60), rng.random_range(1..60));
        let n = if gray { 1 } else { 3 };
        let qf = rng.random_range(1..=100);
        let components = QuantizedImage::plane_dims(dims, n, subsampling)
            .into_iter()
            .enumerate()
            .map(|(c, (ph, pw))| {
                let mut coeffs = CoefficientPlane::zeros(ph, pw);
                for (i, v) in coeffs.data.iter_mut().enumerate() {
                    let dc = i % 64 == 0;
                    if dc {
                        *v = rng.random_range(-1000..=1000);
                    } else if rng.random_bool(0.3) {
                        *v = rng.random_range(-1023..=1023);
                    }
                }
                Component { id: c as u8 + 1, coeffs, qm_index: usize::from(c > 0) }
            })
            .collect();
        let mut quant_tables = vec![qf_to_qm(qf, ComponentKind::Luma).unwrap()];
        if !gray {
            quant_tables.push(qf_to_qm(qf, ComponentKind::Chroma).unwrap());
        }
        QuantizedImage { components, quant_tables, subsampling, pixel_dims: dims }
    }

    #[test]
    fn roundtrip_random_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let q = random_image(&mut rng);
            let bytes = encode_jpeg(&q).unwrap();
            assert_eq!(parse_jpeg(&bytes).unwrap(), q);
        }
    }

    #[test]
    fn deterministic_bytes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_image(&mut rng);
        assert_eq!(encode_jpeg(&q).unwrap(), encode_jpeg(&q).unwrap());
    }

    #[test]
    fn all_zero_planes_roundtrip() {
        let img = PixelImage::new(vec![Plane::filled(24, 40, 128.0); 3], ColorSpace::Rgb);
        let q = compress(&img, 100, Subsampling::S420).unwrap();
        assert!(q.components.iter().all(|c| c.coeffs.data.iter().all(|&v| v == 0)));
        assert_eq!(parse_jpeg(&encode_jpeg(&q).unwrap()).unwrap(), q);
    }

    #[test]
    fn missing_soi_rejected() {
        let img = PixelImage::new(vec![Plane::filled(8, 8, 10.0)], ColorSpace::Gray);
        let bytes = encode_jpeg(&compress(&img, 50, Subsampling::S444).unwrap()).unwrap();
        assert_eq!(parse_jpeg(&bytes[2..]), Err(JfifError::MissingMarker("SOI")));
        assert_eq!(parse_jpeg(&[]), Err(JfifError::MissingMarker("SOI")));
    }

    #[test]
    fn truncated_scan_is_corrupt() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = random_image(&mut rng);
        let bytes = encode_jpeg(&q).unwrap();
        let cut = &bytes[..bytes.len() - 40];
        assert!(matches!(parse_jpeg(cut), Err(JfifError::CorruptEntropyStream(_))));
    }

    #[test]
    fn overflowing_coefficient_rejected() {
        let img = PixelImage::new(vec![Plane::filled(8, 8, 10.0)], ColorSpace::Gray);
        let mut q = compress(&img, 50, Subsampling::S444).unwrap();
        q.components[0].coeffs.data[1] = 1024;
        assert_eq!(
            encode_jpeg(&q),
            Err(JfifError::RangeOverflow { value: 1024, max_bits: 10 })
        );
        q.components[0].coeffs.data[1] = 0;
        q.components[0].coeffs.data[0] = 2048;
        assert!(matches!(encode_jpeg(&q), Err(JfifError::RangeOverflow { max_bits: 11, .. })));
    }

    #[test]
    fn invalid_image_rejected() {
        let img = PixelImage::new(vec![Plane::filled(8, 8, 10.0)], ColorSpace::Gray);
        let mut q = compress(&img, 50, Subsampling::S444).unwrap();
        q.pixel_dims = (9, 8);
        assert!(matches!(encode_jpeg(&q), Err(JfifError::InvalidImage(_))));
    }

    #[test]
    fn progressive_frame_unsupported() {
        let img = PixelImage::new(vec![Plane::filled(8, 8, 10.0)], ColorSpace::Gray);
        let mut bytes = encode_jpeg(&compress(&img, 50, Subsampling::S444).unwrap()).unwrap();
        let sof = bytes.windows(2).position(|w| w == [0xFF, marker::SOF0]).unwrap();
        bytes[sof + 1] = 0xC2;
        assert!(matches!(parse_jpeg(&bytes), Err(JfifError::UnsupportedProcess(_))));
    }

    #[test]
    fn byte_stuffing_present_for_ff_bytes() {
        let mut w = BitWriter::new(Vec::new());
        w.put(0xFF, 8);
        w.put(0x1, 1);
        assert_eq!(w.finish(), vec![0xFF, 0x00, 0xFF, 0x00]);
    }
}
