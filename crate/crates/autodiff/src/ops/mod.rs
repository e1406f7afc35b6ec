mod conv;
mod elementwise;
mod linalg;
mod nn;
mod shape;
mod window;

pub use conv::{conv2d, depthwise_conv2d, transpose_conv2d};
pub use elementwise::{abs, add, add_scalar, mean, mul, neg, scale, sqrt, square, sub, sum};
pub use linalg::{bmm, matmul};
pub use nn::{gelu, layer_norm, softmax};
pub use shape::{concat, gather, permute, reshape, slice};
pub use window::{cyclic_shift, window_partition, window_reverse};
