use std::fmt;
use std::str::FromStr;

use dctx_core::Subsampling;

use crate::{kv, NetError, Result};

/// Architecture variants compared in the ablation study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ablation {
    Full,
    /// Two spatial branches in parallel.
    ParallelSpatial,
    /// Two frequential branches in parallel.
    ParallelFrequential,
    /// Spatial branch followed by the frequential one, no fusion.
    Successive,
    /// Branch outputs summed, then the fusion conv.
    AddFusion,
    /// Concatenation reduced by a 1x1 conv instead of the 3x3 fusion conv.
    ConcatNoConv,
    /// Raw quantized integers in, no quantization matrix anywhere.
    NoQM,
    /// Raw quantized integers with the 64 table entries as extra channels.
    ConcatQM,
}

pub const ABLATIONS: [Ablation; 8] = [
    Ablation::Full,
    Ablation::ParallelSpatial,
    Ablation::ParallelFrequential,
    Ablation::Successive,
    Ablation::AddFusion,
    Ablation::ConcatNoConv,
    Ablation::NoQM,
    Ablation::ConcatQM,
];

impl Ablation {
    pub fn name(self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::ParallelSpatial => "parallel-spatial",
            Ablation::ParallelFrequential => "parallel-frequential",
            Ablation::Successive => "successive",
            Ablation::AddFusion => "add-fusion",
            Ablation::ConcatNoConv => "concat-no-conv",
            Ablation::NoQM => "no-qm",
            Ablation::ConcatQM => "concat-qm",
        }
    }

    /// Whether the network sees dequantized (table-embedded) coefficients.
    pub fn embeds_qm(self) -> bool {
        !matches!(self, Ablation::NoQM | Ablation::ConcatQM)
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ABLATIONS
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ABLATIONS.iter().map(|a| a.name()).collect();
                format!("unknown ablation {s:?}; expected one of {}", names.join(", "))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub window_size: usize,
    pub num_blocks: usize,
    pub sftbs_per_block: usize,
    pub head_dim: usize,
    pub mlp_ratio: usize,
    pub grayscale: bool,
    /// Chroma layout the alignment head is built for (ignored for gray).
    pub chroma: Subsampling,
    pub ablation: Ablation,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embed_dim: 96,
            window_size: 4,
            num_blocks: 4,
            sftbs_per_block: 4,
            head_dim: 32,
            mlp_ratio: 4,
            grayscale: false,
            chroma: Subsampling::S420,
            ablation: Ablation::Full,
        }
    }
}

impl ModelConfig {
    /// Small configuration used by tests and the quick training run.
    pub fn toy() -> Self {
        ModelConfig {
            embed_dim: 32,
            window_size: 2,
            num_blocks: 2,
            sftbs_per_block: 2,
            ..Self::default()
        }
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        self.ablation = ablation;
        self
    }

    pub fn heads(&self) -> usize {
        self.embed_dim / self.head_dim
    }

    /// Coefficient components the model reads and writes.
    pub fn components(&self) -> usize {
        if self.grayscale {
            1
        } else {
            3
        }
    }

    /// Channels per component fed to the head.
    pub fn input_channels(&self) -> usize {
        if self.ablation == Ablation::ConcatQM {
            128
        } else {
            64
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.head_dim == 0 || self.embed_dim % self.head_dim != 0 {
            return Err(NetError::ChannelNotDivisibleByHead {
                channels: self.embed_dim,
                head_dim: self.head_dim,
            });
        }
        if self.window_size < 2 || self.window_size % 2 != 0 {
            return Err(NetError::Config(format!("window_size {} must be even", self.window_size)));
        }
        if self.num_blocks == 0 || self.sftbs_per_block == 0 || self.mlp_ratio == 0 {
            return Err(NetError::Config("num_blocks, sftbs_per_block and mlp_ratio must be positive".into()));
        }
        Ok(())
    }

    /// Canonical text form; every key, fixed order.
    pub fn to_text(&self) -> String {
        format!(
            "embed_dim = {}\nwindow_size = {}\nnum_blocks = {}\nsftbs_per_block = {}\nhead_dim = {}\nmlp_ratio = {}\ngrayscale = {}\nchroma = {}\nablation = {}\n",
            self.embed_dim,
            self.window_size,
            self.num_blocks,
            self.sftbs_per_block,
            self.head_dim,
            self.mlp_ratio,
            self.grayscale,
            match self.chroma {
                Subsampling::S420 => "420",
                Subsampling::S444 => "444",
            },
            self.ablation,
        )
    }

    /// Apply one key; returns false for keys that are not model keys.
    pub fn set(&mut self, key: &str, v: &str) -> Result<bool> {
        match key {
            "embed_dim" => self.embed_dim = kv::value(key, v)?,
            "window_size" => self.window_size = kv::value(key, v)?,
            "num_blocks" => self.num_blocks = kv::value(key, v)?,
            "sftbs_per_block" => self.sftbs_per_block = kv::value(key, v)?,
            "head_dim" => self.head_dim = kv::value(key, v)?,
            "mlp_ratio" => self.mlp_ratio = kv::value(key, v)?,
            "grayscale" => self.grayscale = kv::bool_value(key, v)?,
            "chroma" => self.chroma = kv::value(key, v)?,
            "ablation" => self.ablation = kv::value(key, v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Parse text produced by [`to_text`](Self::to_text); missing keys keep
    /// their defaults, unknown keys are an error.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ModelConfig::default();
        for (k, v) in kv::parse(text)? {
            if !cfg.set(&k, &v)? {
                return Err(NetError::Config(format!("unknown model key {k:?}")));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn hash(&self) -> u64 {
        kv::fnv1a(self.to_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        for a in ABLATIONS {
            let cfg = ModelConfig {
                grayscale: a == Ablation::NoQM,
                ..ModelConfig::toy().with_ablation(a)
            };
            assert_eq!(ModelConfig::from_text(&cfg.to_text()).unwrap(), cfg);
        }
    }

    #[test]
    fn head_divisibility_enforced() {
        let cfg = ModelConfig {
            embed_dim: 48,
            ..ModelConfig::toy()
        };
        assert!(matches!(cfg.validate(), Err(NetError::ChannelNotDivisibleByHead { .. })));
        assert_eq!(ModelConfig::toy().heads(), 1);
        assert_eq!(ModelConfig::default().heads(), 3);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ModelConfig::toy();
        let b = a.clone().with_ablation(Ablation::NoQM);
        assert_eq!(a.hash(), ModelConfig::toy().hash());
        assert_ne!(a.hash(), b.hash());
    }
}
