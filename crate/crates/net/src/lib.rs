//! The coefficient restoration network: a window-attention/channel-attention
//! transformer over collocated DCT maps, its training objective, the
//! training loop and checkpoint files.

pub mod checkpoint;
mod config;
mod error;
pub mod input;
pub mod kv;
pub mod layers;
pub mod loss;
mod model;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use config::{Ablation, ModelConfig, ABLATIONS};
pub use error::{NetError, Result};
pub use input::{jpeg_coefficients, prepare, ModelInput, COEFF_SCALE};
pub use loss::{dual_loss, LossConfig, LossDomain};
pub use model::{Model, Recovered};
pub use train::{lr_schedule, make_batch, StepReport, TrainConfig, Trainer};
