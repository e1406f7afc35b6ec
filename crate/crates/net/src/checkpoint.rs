//! Binary checkpoint files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "DCTX" u32:version
//! u32:len model-config-text  u64:fnv1a(model-config-text)
//! u32:len train-config-text
//! u32:count { u16:len name  u8:dtype  u8:rank  u32*rank:shape  f32*:values }
//! u64:step  u64:adam-step  { f32*:m  f32*:v } per tensor, same order
//! [u8; 32]:rng-seed  u64:rng-stream  u128:rng-word-pos
//! u64:fnv1a(everything above)
//! ```

use std::path::Path;

use dctx_autodiff::AdamState;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::kv::fnv1a;
use crate::{Model, ModelConfig, NetError, Result, TrainConfig, Trainer};

pub const MAGIC: &[u8; 4] = b"DCTX";
pub const VERSION: u32 = 1;
const DTYPE_F32: u8 = 0;

/// Everything needed to resume training bit-for-bit.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub model: Model,
    pub train: TrainConfig,
    pub adam: AdamState,
    pub step: u64,
    pub rng: ChaCha8Rng,
}

impl Checkpoint {
    pub fn from_trainer(t: &Trainer) -> Self {
        Checkpoint {
            model: t.model.clone(),
            train: t.cfg.clone(),
            adam: t.adam.clone(),
            step: t.step,
            rng: t.rng.clone(),
        }
    }

    /// Resume with `train` (usually the stored config, possibly with a
    /// different step budget).
    pub fn into_trainer(self, train: TrainConfig) -> Result<Trainer> {
        train.validate()?;
        Ok(Trainer {
            model: self.model,
            cfg: train,
            adam: self.adam,
            step: self.step,
            rng: self.rng,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        let cfg = self.model.config.to_text();
        put_str32(&mut b, &cfg);
        b.extend_from_slice(&fnv1a(cfg.as_bytes()).to_le_bytes());
        put_str32(&mut b, &self.train.to_text());
        b.extend_from_slice(&(self.model.params.len() as u32).to_le_bytes());
        for p in self.model.params.iter() {
            b.extend_from_slice(&(p.name.len() as u16).to_le_bytes());
            b.extend_from_slice(p.name.as_bytes());
            b.push(DTYPE_F32);
            b.push(p.shape.len() as u8);
            for &d in &p.shape {
                b.extend_from_slice(&(d as u32).to_le_bytes());
            }
            put_f32s(&mut b, &p.value);
        }
        b.extend_from_slice(&self.step.to_le_bytes());
        b.extend_from_slice(&self.adam.step.to_le_bytes());
        for (m, v) in self.adam.m.iter().zip(&self.adam.v) {
            put_f32s(&mut b, m);
            put_f32s(&mut b, v);
        }
        b.extend_from_slice(&self.rng.get_seed());
        b.extend_from_slice(&self.rng.get_stream().to_le_bytes());
        b.extend_from_slice(&self.rng.get_word_pos().to_le_bytes());
        let sum = fnv1a(&b);
        b.extend_from_slice(&sum.to_le_bytes());
        b
    }

    /// Parse a checkpoint. With `expected`, the stored model config must
    /// match it exactly.
    pub fn from_bytes(bytes: &[u8], expected: Option<&ModelConfig>) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..4] != MAGIC {
            return Err(NetError::BadMagic);
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(NetError::VersionMismatch { found: version, expected: VERSION });
        }
        if bytes.len() < 16 {
            return Err(NetError::TruncatedFile("missing trailer".into()));
        }
        let (body, trailer) = bytes.split_at(bytes.len() - 8);
        let mut r = Reader { buf: body, pos: 8 };
        let cfg_text = r.string32()?;
        let hash = r.u64()?;
        if hash != fnv1a(cfg_text.as_bytes()) {
            return Err(NetError::TruncatedFile("config hash mismatch".into()));
        }
        if u64::from_le_bytes(trailer.try_into().unwrap()) != fnv1a(body) {
            return Err(NetError::TruncatedFile("checksum mismatch".into()));
        }
        let config = ModelConfig::from_text(&cfg_text)?;
        if let Some(e) = expected {
            if *e != config {
                return Err(NetError::ConfigMismatch(format!(
                    "file has\n{}expected\n{}",
                    cfg_text,
                    e.to_text()
                )));
            }
        }
        let train = TrainConfig::from_text(&r.string32()?)?;
        let mut model = Model::new(config, 0)?;
        let count = r.u32()? as usize;
        if count != model.params.len() {
            return Err(NetError::ConfigMismatch(format!(
                "{count} tensors stored, model has {}",
                model.params.len()
            )));
        }
        for i in 0..count {
            let len = r.u16()? as usize;
            let name = String::from_utf8(r.take(len)?.to_vec())
                .map_err(|_| NetError::TruncatedFile("tensor name is not utf-8".into()))?;
            let dtype = r.u8()?;
            if dtype != DTYPE_F32 {
                return Err(NetError::TruncatedFile(format!("unknown dtype tag {dtype}")));
            }
            let rank = r.u8()? as usize;
            let shape = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let p = model.params.iter_mut().nth(i).expect("index below count");
            if p.name != name || p.shape != shape {
                return Err(NetError::ConfigMismatch(format!(
                    "tensor {i}: stored {name} {shape:?}, model has {} {:?}",
                    p.name, p.shape
                )));
            }
            let n = p.value.len();
            p.value = r.f32s(n)?;
        }
        let step = r.u64()?;
        let mut adam = AdamState::new(&model.params);
        adam.step = r.u64()?;
        for (m, v) in adam.m.iter_mut().zip(adam.v.iter_mut()) {
            *m = r.f32s(m.len())?;
            *v = r.f32s(v.len())?;
        }
        let seed: [u8; 32] = r.take(32)?.try_into().unwrap();
        let stream = r.u64()?;
        let word_pos = u128::from_le_bytes(r.take(16)?.try_into().unwrap());
        if r.pos != body.len() {
            return Err(NetError::TruncatedFile(format!("{} trailing bytes", body.len() - r.pos)));
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(stream);
        rng.set_word_pos(word_pos);
        Ok(Checkpoint {
            model,
            train,
            adam,
            step,
            rng,
        })
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, ckpt.to_bytes())?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path, expected: Option<&ModelConfig>) -> Result<Checkpoint> {
    Checkpoint::from_bytes(&std::fs::read(path)?, expected)
}

fn put_str32(b: &mut Vec<u8>, s: &str) {
    b.extend_from_slice(&(s.len() as u32).to_le_bytes());
    b.extend_from_slice(s.as_bytes());
}

fn put_f32s(b: &mut Vec<u8>, v: &[f32]) {
    for x in v {
        b.extend_from_slice(&x.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| NetError::TruncatedFile(format!("wanted {n} bytes at offset {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string32(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| NetError::TruncatedFile("text is not utf-8".into()))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| NetError::TruncatedFile("size overflow".into()))?)?;
        Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }
}
