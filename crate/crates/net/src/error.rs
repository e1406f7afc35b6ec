use dctx_autodiff::AutodiffError;
use dctx_core::blockdct::BlockDctError;
use dctx_core::collocate::CollocateError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("input does not fit the model: {0}")]
    DimMismatch(String),
    #[error("spatial dims {h}x{w} not divisible by window size {m}")]
    DimNotDivisibleByWindow { h: usize, w: usize, m: usize },
    #[error("{channels} channels not divisible by head dim {head_dim}")]
    ChannelNotDivisibleByHead { channels: usize, head_dim: usize },
    #[error("image {h}x{w} smaller than crop {crop}")]
    ImageTooSmall { h: usize, w: usize, crop: usize },
    #[error("non-finite loss {loss} at step {step}")]
    NonFiniteLoss { step: u64, loss: f64 },
    #[error("step {step} outside 0..{steps}")]
    StepOutOfRange { step: u64, steps: u64 },
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("checkpoint format version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("checkpoint truncated or corrupt: {0}")]
    TruncatedFile(String),
    #[error("checkpoint config does not match: {0}")]
    ConfigMismatch(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Collocate(#[from] CollocateError),
    #[error(transparent)]
    BlockDct(#[from] BlockDctError),
}

pub type Result<T, E = NetError> = std::result::Result<T, E>;
