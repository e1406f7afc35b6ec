//! `dctx`: JPEG degradation, decoding, learned coefficient recovery,
//! training and evaluation from the command line.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dctx_core::metrics::MetricChannel;

pub use commands::{
    load_corpus, parse_pairs, resolve_config, run, sparsity, EvalPair, ResolvedConfig, TRACE_HEADER,
};
pub use error::{CliError, Result};
pub use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "dctx", version, about = "DCT-domain JPEG restoration toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress a PPM/PGM image to a baseline JPEG, once or twice.
    Degrade(DegradeArgs),
    /// Standard JPEG decode to PPM/PGM.
    Decode(DecodeArgs),
    /// Restore a JPEG with a trained checkpoint.
    Recover(RecoverArgs),
    /// Train a model on a directory of lossless images.
    Train(TrainArgs),
    /// Write a freshly initialised checkpoint.
    Init(InitArgs),
    /// Pixel- and DCT-domain quality metrics for image pairs.
    Eval(EvalArgs),
    /// Print quantization tables and coefficient statistics of a JPEG.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct DegradeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Quality factor of a single compression.
    #[arg(long, conflicts_with_all = ["qf1", "qf2"])]
    pub qf: Option<u32>,
    /// First quality factor of a double compression.
    #[arg(long, requires = "qf2")]
    pub qf1: Option<u32>,
    /// Second quality factor of a double compression.
    #[arg(long, requires = "qf1")]
    pub qf2: Option<u32>,
    /// Grid shift "dx,dy" between the two compressions.
    #[arg(long, default_value = "0,0")]
    pub shift: String,
    #[arg(long, default_value = "420")]
    pub subsampling: String,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Write the 64 recovered luma coefficient channels as PGM files here.
    #[arg(long)]
    pub dump_coeffs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory of PPM (or PGM, for grayscale models) training images.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: PathBuf,
    /// key = value file with model and training settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Continue from this checkpoint.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Fine-tune on random double compressions with shifted grids.
    #[arg(long)]
    pub double_jpeg: bool,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Extra key=value overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Loss trace CSV; defaults to `<out>.trace.csv`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Stop (and save) once the step counter reaches this value, leaving
    /// the schedule untouched so that `--resume` can finish the run.
    #[arg(long)]
    pub stop_at: Option<u64>,
    /// Also save the checkpoint every N steps.
    #[arg(long)]
    pub save_every: Option<u64>,
    /// Print progress every N steps (0 = never).
    #[arg(long, default_value_t = 100)]
    pub log_every: u64,
}

#[derive(Debug, Args)]
pub struct InitArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// CSV of "reference,test" paths, relative to the list's directory.
    #[arg(long, conflicts_with = "dir")]
    pub pairs: Option<PathBuf>,
    /// Reference directory and JPEG directory, matched by file stem.
    #[arg(long, num_args = 2, value_names = ["GT_DIR", "JPG_DIR"])]
    pub dir: Option<Vec<PathBuf>>,
    /// Also compute per-frequency JS divergence and Bhattacharyya distance.
    #[arg(long)]
    pub dct_metrics: bool,
    /// Also evaluate the restored output of this checkpoint.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Samples for PSNR and PSNR-B: "rgb" (all channels) or "y" (luma).
    #[arg(long, default_value = "rgb")]
    pub metric_channel: MetricChannel,
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub input: PathBuf,
    /// Write the 64 luma coefficient channels as PGM files here.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}
