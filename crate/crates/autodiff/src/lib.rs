//! Dense reverse-mode differentiation over small n-dimensional tensors.
//!
//! Every operation records a closure on a tape of reference-counted nodes;
//! [`Tensor::backward`] walks the tape in reverse creation order. Graphs are
//! single-threaded; build one per thread from a [`ParamStore`] snapshot.

mod error;
pub mod gradcheck;
mod ops;
mod optim;
mod param;
mod real;
mod tensor;

pub use error::AutodiffError;
pub use ops::*;
pub use optim::{adam_step, clip_grad_global_norm, global_norm, AdamConfig, AdamState};
pub use param::{Init, ParamSet, ParamStore, Parameter};
pub use real::Real;
pub use tensor::Tensor;

pub type Result<T, E = AutodiffError> = std::result::Result<T, E>;
