//! Frequency-domain L1, pixel-domain Charbonnier, and their weighted sum.
//!
//! The pixel term is computed on the difference of the two coefficient sets:
//! reconstruction (inverse DCT, YCbCr to RGB, scaling to [0, 1]) is affine,
//! so F(x) - F(x̂) = L(x - x̂) for its linear part L. No clamping happens on
//! this path.

use std::fmt;
use std::str::FromStr;

use dctx_autodiff::{self as ad, Real, Tensor};
use dctx_core::blockdct::dct_basis;

use crate::{NetError, Result};

pub const LAMBDA: f64 = 255.0;
pub const CHARBONNIER_EPS: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossDomain {
    /// L1 on coefficients plus λ · Charbonnier on pixels.
    Dual,
    /// L1 on coefficients only.
    Frequency,
    /// L1 on pixels only.
    Pixel,
}

impl fmt::Display for LossDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossDomain::Dual => "dual",
            LossDomain::Frequency => "frequency",
            LossDomain::Pixel => "pixel",
        })
    }
}

impl FromStr for LossDomain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dual" => Ok(LossDomain::Dual),
            "frequency" => Ok(LossDomain::Frequency),
            "pixel" => Ok(LossDomain::Pixel),
            _ => Err(format!("unknown loss domain {s:?}; expected dual, frequency or pixel")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossConfig {
    pub lambda: f64,
    pub eps: f64,
    pub domain: LossDomain,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            lambda: LAMBDA,
            eps: CHARBONNIER_EPS,
            domain: LossDomain::Dual,
        }
    }
}

fn same_shape<T: Real>(op: &str, a: &Tensor<T>, b: &Tensor<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(NetError::DimMismatch(format!("{op}: {:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

/// mean(sqrt(d² + ε²)) of a difference tensor.
pub fn charbonnier<T: Real>(diff: &Tensor<T>, eps: f64) -> Tensor<T> {
    ad::mean(&ad::sqrt(&ad::add_scalar(&ad::square(diff), eps * eps)))
}

pub fn charbonnier_loss<T: Real>(x: &Tensor<T>, x_hat: &Tensor<T>, eps: f64) -> Result<Tensor<T>> {
    same_shape("charbonnier_loss", x, x_hat)?;
    Ok(charbonnier(&ad::sub(x_hat, x)?, eps))
}

pub fn freq_l1_loss<T: Real>(x: &Tensor<T>, x_hat: &Tensor<T>) -> Result<Tensor<T>> {
    same_shape("freq_l1_loss", x, x_hat)?;
    Ok(ad::mean(&ad::abs(&ad::sub(x_hat, x)?)))
}

/// (coefficient k = 8u+v, pixel p = 8x+y) entries of the 8x8 inverse DCT.
pub fn idct_matrix() -> Vec<f64> {
    let c = dct_basis();
    let mut m = vec![0.0; 64 * 64];
    for k in 0..64 {
        for p in 0..64 {
            m[k * 64 + p] = c[k / 8][p / 8] * c[k % 8][p % 8];
        }
    }
    m
}

/// Rows multiply (Y, Cb, Cr) row vectors into (R, G, B).
const YCC_TO_RGB_T: [f64; 9] = [1.0, 1.0, 1.0, 0.0, -0.344_136, 1.772, 1.402, -0.714_136, 0.0];

/// Pixel-domain image of a coefficient difference (components · 64, h, w):
/// per-block inverse DCT, colour conversion for three components, /255.
/// Output is (h·w, 64, components) for colour, (1, h·w, 64) for gray.
pub fn pixel_difference<T: Real>(diff: &Tensor<T>) -> Result<Tensor<T>> {
    let (n, h, w) = match *diff.shape() {
        [c, h, w] if c % 64 == 0 && (c == 64 || c == 192) => (c / 64, h, w),
        _ => return Err(NetError::DimMismatch(format!("coefficient stack {:?}", diff.shape()))),
    };
    let cvt = |v: Vec<f64>| v.into_iter().map(T::c).collect::<Vec<T>>();
    let idct = Tensor::new(&[64, 64], cvt(idct_matrix()))?;
    let blocks = ad::permute(&ad::reshape(diff, &[n, 64, h * w])?, &[0, 2, 1])?;
    let px = ad::matmul(&blocks, &idct)?;
    let px = if n == 3 {
        let m = Tensor::new(&[3, 3], cvt(YCC_TO_RGB_T.to_vec()))?;
        ad::matmul(&ad::permute(&px, &[1, 2, 0])?, &m)?
    } else {
        px
    };
    Ok(ad::scale(&px, 1.0 / 255.0))
}

/// Training objective between lossless target and recovered coefficients,
/// both (components · 64, h, w).
pub fn dual_loss<T: Real>(x: &Tensor<T>, x_hat: &Tensor<T>, cfg: &LossConfig) -> Result<Tensor<T>> {
    same_shape("dual_loss", x, x_hat)?;
    let d = ad::sub(x_hat, x)?;
    Ok(match cfg.domain {
        LossDomain::Frequency => ad::mean(&ad::abs(&d)),
        LossDomain::Pixel => ad::mean(&ad::abs(&pixel_difference(&d)?)),
        LossDomain::Dual => {
            let freq = ad::mean(&ad::abs(&d));
            if cfg.lambda == 0.0 {
                freq
            } else {
                let pix = charbonnier(&pixel_difference(&d)?, cfg.eps);
                ad::add(&freq, &ad::scale(&pix, cfg.lambda))?
            }
        }
    })
}
