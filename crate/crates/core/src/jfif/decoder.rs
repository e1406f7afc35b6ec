use super::huffman::{extend, DecodeTable, HuffmanSpec};
use super::{marker, JfifError, ZIGZAG};
use crate::blockdct::{ComponentKind, QuantMatrix};
use crate::quantized::{CoefficientPlane, Component, QuantizedImage, Subsampling};

struct FrameComponent {
    id: u8,
    h: usize,
    v: usize,
    tq: usize,
    /// Table contents captured when the component's first scan started.
    table: Option<[u16; 64]>,
}

struct Frame {
    height: usize,
    width: usize,
    components: Vec<FrameComponent>,
    subsampling: Subsampling,
    planes: Vec<CoefficientPlane>,
    hmax: usize,
    vmax: usize,
}

impl Frame {
    fn mcus_wide(&self) -> usize {
        self.width.div_ceil(8 * self.hmax)
    }

    fn mcus_high(&self) -> usize {
        self.height.div_ceil(8 * self.vmax)
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    byte: u32,
    nbits: u32,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        BitReader {
            data,
            pos,
            byte: 0,
            nbits: 0,
        }
    }

    fn bit(&mut self) -> Result<u32, JfifError> {
        if self.nbits == 0 {
            let b = *self
                .data
                .get(self.pos)
                .ok_or_else(|| JfifError::CorruptEntropyStream("data ends inside a scan".into()))?;
            if b == 0xFF {
                match self.data.get(self.pos + 1) {
                    Some(0x00) => self.pos += 2,
                    Some(&m) => {
                        return Err(JfifError::CorruptEntropyStream(format!(
                            "premature marker 0xFF{m:02X} inside a scan"
                        )))
                    }
                    None => {
                        return Err(JfifError::CorruptEntropyStream("data ends inside a scan".into()))
                    }
                }
            } else {
                self.pos += 1;
            }
            self.byte = b as u32;
            self.nbits = 8;
        }
        self.nbits -= 1;
        Ok((self.byte >> self.nbits) & 1)
    }

    fn bits(&mut self, n: u8) -> Result<u32, JfifError> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.bit()?;
        }
        Ok(v)
    }

    /// Discard buffered bits and consume an RSTn marker.
    fn restart(&mut self) -> Result<(), JfifError> {
        self.nbits = 0;
        if self.data.get(self.pos) != Some(&0xFF) {
            return Err(JfifError::CorruptEntropyStream("expected restart marker".into()));
        }
        while self.data.get(self.pos) == Some(&0xFF) {
            self.pos += 1;
        }
        match self.data.get(self.pos) {
            Some(&m) if (marker::RST0..=marker::RST7).contains(&m) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(JfifError::CorruptEntropyStream("expected restart marker".into())),
        }
    }
}

fn read_u16(bytes: &[u8], pos: usize) -> Result<usize, JfifError> {
    match bytes.get(pos..pos + 2) {
        Some(b) => Ok(((b[0] as usize) << 8) | b[1] as usize),
        None => Err(JfifError::MalformedSegment("truncated marker segment".into())),
    }
}

/// Payload of the marker segment starting at `pos` (just past the marker
/// code), and the position after it.
fn segment(bytes: &[u8], pos: usize) -> Result<(&[u8], usize), JfifError> {
    let len = read_u16(bytes, pos)?;
    if len < 2 || pos + len > bytes.len() {
        return Err(JfifError::MalformedSegment(format!("segment length {len}")));
    }
    Ok((&bytes[pos + 2..pos + len], pos + len))
}

fn parse_dqt(mut seg: &[u8], tables: &mut [Option<[u16; 64]>; 4]) -> Result<(), JfifError> {
    while !seg.is_empty() {
        let pq = seg[0] >> 4;
        let tq = (seg[0] & 15) as usize;
        if tq > 3 {
            return Err(JfifError::MalformedSegment(format!("quantization table id {tq}")));
        }
        let width = if pq == 0 { 1 } else { 2 };
        let need = 1 + 64 * width;
        if seg.len() < need {
            return Err(JfifError::MalformedSegment("truncated DQT".into()));
        }
        let mut t = [0u16; 64];
        for k in 0..64 {
            let v = if pq == 0 {
                seg[1 + k] as u16
            } else {
                ((seg[1 + 2 * k] as u16) << 8) | seg[2 + 2 * k] as u16
            };
            if v == 0 {
                return Err(JfifError::MalformedSegment("zero quantizer".into()));
            }
            if v > 255 {
                return Err(JfifError::UnsupportedProcess("16-bit quantization table".into()));
            }
            t[ZIGZAG[k]] = v;
        }
        tables[tq] = Some(t);
        seg = &seg[need..];
    }
    Ok(())
}

type HuffSlots = [Option<DecodeTable>; 4];

fn parse_dht(mut seg: &[u8], dc: &mut HuffSlots, ac: &mut HuffSlots) -> Result<(), JfifError> {
    while !seg.is_empty() {
        if seg.len() < 17 {
            return Err(JfifError::MalformedSegment("truncated DHT".into()));
        }
        let class = seg[0] >> 4;
        let id = (seg[0] & 15) as usize;
        if class > 1 || id > 3 {
            return Err(JfifError::MalformedSegment(format!("huffman table {:#04x}", seg[0])));
        }
        let mut bits = [0u8; 16];
        bits.copy_from_slice(&seg[1..17]);
        let n: usize = bits.iter().map(|&b| b as usize).sum();
        if seg.len() < 17 + n {
            return Err(JfifError::MalformedSegment("truncated DHT".into()));
        }
        let spec = HuffmanSpec {
            bits,
            values: seg[17..17 + n].to_vec(),
        };
        let table = DecodeTable::new(&spec)?;
        if class == 0 {
            dc[id] = Some(table);
        } else {
            ac[id] = Some(table);
        }
        seg = &seg[17 + n..];
    }
    Ok(())
}

fn parse_sof(seg: &[u8]) -> Result<Frame, JfifError> {
    if seg.len() < 6 {
        return Err(JfifError::MalformedSegment("truncated SOF".into()));
    }
    if seg[0] != 8 {
        return Err(JfifError::UnsupportedProcess(format!("{}-bit samples", seg[0])));
    }
    let height = read_u16(seg, 1)?;
    let width = read_u16(seg, 3)?;
    let n = seg[5] as usize;
    if height == 0 || width == 0 {
        return Err(JfifError::UnsupportedProcess("zero or DNL-defined dimensions".into()));
    }
    if seg.len() < 6 + 3 * n {
        return Err(JfifError::MalformedSegment("truncated SOF".into()));
    }
    let mut components: Vec<FrameComponent> = (0..n)
        .map(|i| {
            let c = &seg[6 + 3 * i..9 + 3 * i];
            FrameComponent {
                id: c[0],
                h: (c[1] >> 4) as usize,
                v: (c[1] & 15) as usize,
                tq: (c[2] & 3) as usize,
                table: None,
            }
        })
        .collect();
    let factors: Vec<(usize, usize)> = components.iter().map(|c| (c.h, c.v)).collect();
    let subsampling = match n {
        1 => {
            components[0].h = 1;
            components[0].v = 1;
            Subsampling::S444
        }
        3 if factors.iter().all(|&f| f == (1, 1)) => Subsampling::S444,
        3 if factors == [(2, 2), (1, 1), (1, 1)] => Subsampling::S420,
        3 => return Err(JfifError::UnsupportedSampling(format!("sampling factors {factors:?}"))),
        _ => return Err(JfifError::UnsupportedSampling(format!("{n} components"))),
    };
    let hmax = components.iter().map(|c| c.h).max().unwrap_or(1);
    let vmax = components.iter().map(|c| c.v).max().unwrap_or(1);
    let mut frame = Frame {
        height,
        width,
        components,
        subsampling,
        planes: Vec::new(),
        hmax,
        vmax,
    };
    let (mw, mh) = (frame.mcus_wide(), frame.mcus_high());
    frame.planes = frame
        .components
        .iter()
        .map(|c| CoefficientPlane::zeros(mh * c.v * 8, mw * c.h * 8))
        .collect();
    Ok(frame)
}

struct ScanComponent {
    index: usize,
    dc: usize,
    ac: usize,
}

fn decode_block(
    reader: &mut BitReader,
    dc: &DecodeTable,
    ac: &DecodeTable,
    pred: &mut i32,
) -> Result<[i32; 64], JfifError> {
    let mut block = [0i32; 64];
    let t = dc.decode(|| reader.bit())?;
    if t > 11 {
        return Err(JfifError::CorruptEntropyStream(format!("DC category {t}")));
    }
    *pred += extend(reader.bits(t)?, t);
    block[0] = *pred;
    let mut k = 1;
    while k < 64 {
        let rs = ac.decode(|| reader.bit())?;
        let (run, size) = ((rs >> 4) as usize, rs & 15);
        if size == 0 {
            if run == 15 {
                k += 16;
                continue;
            }
            break;
        }
        k += run;
        if k > 63 {
            return Err(JfifError::CorruptEntropyStream("AC run past end of block".into()));
        }
        block[ZIGZAG[k]] = extend(reader.bits(size)?, size);
        k += 1;
    }
    if k > 64 {
        return Err(JfifError::CorruptEntropyStream("ZRL run past end of block".into()));
    }
    Ok(block)
}

/// Decode one scan's entropy-coded segment beginning at `pos`; returns the
/// position just past the consumed data.
fn decode_scan(
    bytes: &[u8],
    pos: usize,
    frame: &mut Frame,
    scan: &[ScanComponent],
    dc_tables: &HuffSlots,
    ac_tables: &HuffSlots,
    restart_interval: usize,
) -> Result<usize, JfifError> {
    let mut tables = Vec::with_capacity(scan.len());
    for sc in scan {
        let dc = dc_tables[sc.dc]
            .as_ref()
            .ok_or_else(|| JfifError::MalformedSegment(format!("missing DC table {}", sc.dc)))?;
        let ac = ac_tables[sc.ac]
            .as_ref()
            .ok_or_else(|| JfifError::MalformedSegment(format!("missing AC table {}", sc.ac)))?;
        tables.push((dc, ac));
    }
    let mut reader = BitReader::new(bytes, pos);
    let mut preds = vec![0i32; scan.len()];

    // unit = one MCU for interleaved scans, one block otherwise
    let (units_wide, units_high) = if scan.len() == 1 {
        let c = &frame.components[scan[0].index];
        let cw = (frame.width * c.h).div_ceil(frame.hmax);
        let ch = (frame.height * c.v).div_ceil(frame.vmax);
        (cw.div_ceil(8), ch.div_ceil(8))
    } else {
        (frame.mcus_wide(), frame.mcus_high())
    };
    let total = units_wide * units_high;
    for unit in 0..total {
        if restart_interval > 0 && unit > 0 && unit % restart_interval == 0 {
            reader.restart()?;
            preds.iter_mut().for_each(|p| *p = 0);
        }
        let (ur, uc) = (unit / units_wide, unit % units_wide);
        for (s, sc) in scan.iter().enumerate() {
            let (h, v) = if scan.len() == 1 {
                (1, 1)
            } else {
                (frame.components[sc.index].h, frame.components[sc.index].v)
            };
            for by in 0..v {
                for bx in 0..h {
                    let block = decode_block(&mut reader, tables[s].0, tables[s].1, &mut preds[s])?;
                    frame.planes[sc.index].set_block(ur * v + by, uc * h + bx, &block);
                }
            }
        }
    }
    Ok(reader.pos)
}

fn process_name(code: u8) -> String {
    match code {
        0xC2 | 0xC6 | 0xCA | 0xCE => format!("progressive (SOF{})", code - 0xC0),
        0xC3 | 0xC7 | 0xCB | 0xCF => format!("lossless (SOF{})", code - 0xC0),
        0xC9..=0xCF => format!("arithmetic coding (SOF{})", code - 0xC0),
        _ => format!("SOF{}", code - 0xC0),
    }
}

/// Read a baseline JFIF stream down to its quantized coefficients.
pub fn parse_jpeg(bytes: &[u8]) -> Result<QuantizedImage, JfifError> {
    if bytes.len() < 2 || bytes[0] != 0xFF || bytes[1] != marker::SOI {
        return Err(JfifError::MissingMarker("SOI"));
    }
    let mut pos = 2;
    let mut qtables: [Option<[u16; 64]>; 4] = [None; 4];
    let mut dc_tables: HuffSlots = Default::default();
    let mut ac_tables: HuffSlots = Default::default();
    let mut restart_interval = 0;
    let mut frame: Option<Frame> = None;
    let mut scans = 0;

    loop {
        // find the next marker, tolerating fill bytes and stray padding
        while pos < bytes.len() && bytes[pos] != 0xFF {
            pos += 1;
        }
        while pos < bytes.len() && bytes[pos] == 0xFF {
            pos += 1;
        }
        let Some(&code) = bytes.get(pos) else {
            if scans > 0 {
                break;
            }
            return Err(match frame {
                None => JfifError::MissingMarker("SOF0"),
                Some(_) => JfifError::MissingMarker("SOS"),
            });
        };
        pos += 1;
        match code {
            marker::EOI => break,
            0x00 | marker::RST0..=marker::RST7 => {}
            marker::SOF0 | marker::SOF1 => {
                let (seg, next) = segment(bytes, pos)?;
                if frame.is_some() {
                    return Err(JfifError::MalformedSegment("multiple frames".into()));
                }
                frame = Some(parse_sof(seg)?);
                pos = next;
            }
            0xC2 | 0xC3 | 0xC5..=0xC7 | 0xC9..=0xCB | 0xCD..=0xCF => {
                return Err(JfifError::UnsupportedProcess(process_name(code)))
            }
            marker::DAC => return Err(JfifError::UnsupportedProcess("arithmetic coding".into())),
            marker::DQT => {
                let (seg, next) = segment(bytes, pos)?;
                parse_dqt(seg, &mut qtables)?;
                pos = next;
            }
            marker::DHT => {
                let (seg, next) = segment(bytes, pos)?;
                parse_dht(seg, &mut dc_tables, &mut ac_tables)?;
                pos = next;
            }
            marker::DRI => {
                let (seg, next) = segment(bytes, pos)?;
                restart_interval = read_u16(seg, 0)?;
                pos = next;
            }
            marker::SOS => {
                let (seg, next) = segment(bytes, pos)?;
                let f = frame.as_mut().ok_or(JfifError::MissingMarker("SOF0"))?;
                let ns = *seg.first().ok_or_else(|| JfifError::MalformedSegment("empty SOS".into()))? as usize;
                if ns == 0 || ns > 4 || seg.len() < 1 + 2 * ns + 3 {
                    return Err(JfifError::MalformedSegment("bad SOS header".into()));
                }
                let mut scan = Vec::with_capacity(ns);
                for i in 0..ns {
                    let id = seg[1 + 2 * i];
                    let sel = seg[2 + 2 * i];
                    let index = f
                        .components
                        .iter()
                        .position(|c| c.id == id)
                        .ok_or_else(|| JfifError::MalformedSegment(format!("scan names unknown component {id}")))?;
                    scan.push(ScanComponent {
                        index,
                        dc: (sel >> 4) as usize & 3,
                        ac: (sel & 15) as usize & 3,
                    });
                }
                let (ss, se, a) = (seg[1 + 2 * ns], seg[2 + 2 * ns], seg[3 + 2 * ns]);
                if ss != 0 || se != 63 || a != 0 {
                    return Err(JfifError::UnsupportedProcess("spectral selection / successive approximation".into()));
                }
                for sc in &scan {
                    let comp = &mut f.components[sc.index];
                    if comp.table.is_none() {
                        comp.table = Some(qtables[comp.tq].ok_or_else(|| {
                            JfifError::MalformedSegment(format!("missing quantization table {}", comp.tq))
                        })?);
                    }
                }
                pos = decode_scan(bytes, next, f, &scan, &dc_tables, &ac_tables, restart_interval)?;
                scans += 1;
            }
            _ => {
                // APPn, COM and anything else with a length field
                let (_, next) = segment(bytes, pos)?;
                pos = next;
            }
        }
    }

    let frame = frame.ok_or(JfifError::MissingMarker("SOF0"))?;
    if scans == 0 {
        return Err(JfifError::MissingMarker("SOS"));
    }
    let mut table_ids: Vec<usize> = Vec::new();
    let mut quant_tables = Vec::new();
    let mut components = Vec::with_capacity(frame.components.len());
    for (i, (comp, plane)) in frame.components.iter().zip(frame.planes).enumerate() {
        let qm_index = match table_ids.iter().position(|&t| t == comp.tq) {
            Some(k) => k,
            None => {
                let values = comp.table.or(qtables[comp.tq]).ok_or_else(|| {
                    JfifError::MalformedSegment(format!("missing quantization table {}", comp.tq))
                })?;
                let kind = if i == 0 { ComponentKind::Luma } else { ComponentKind::Chroma };
                table_ids.push(comp.tq);
                quant_tables.push(QuantMatrix::new(values, kind));
                quant_tables.len() - 1
            }
        };
        components.push(Component {
            id: comp.id,
            coeffs: plane,
            qm_index,
        });
    }
    Ok(QuantizedImage {
        components,
        quant_tables,
        subsampling: frame.subsampling,
        pixel_dims: (frame.height, frame.width),
    })
}
