//! Real-valued planar images.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColorSpace {
    Rgb,
    YCbCr,
    Gray,
}

impl ColorSpace {
    pub fn channels(self) -> usize {
        match self {
            ColorSpace::Gray => 1,
            ColorSpace::Rgb | ColorSpace::YCbCr => 3,
        }
    }
}

impl fmt::Display for ColorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ColorSpace::Rgb => "RGB",
            ColorSpace::YCbCr => "YCbCr",
            ColorSpace::Gray => "Gray",
        };
        f.write_str(s)
    }
}

/// A single row-major channel of real samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Plane {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Plane {
            height,
            width,
            data,
        }
    }

    /// Panics if `data.len() != height * width`.
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), height * width, "plane data length");
        Plane {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.width + col] = v;
    }

    /// Sample with coordinates clamped into the plane (edge replication).
    #[inline]
    pub fn get_clamped(&self, row: isize, col: isize) -> f64 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.get(r, c)
    }

    /// Grow to `height` x `width` by replicating the last row and column.
    pub fn pad_edge(&self, height: usize, width: usize) -> Plane {
        assert!(height >= self.height && width >= self.width);
        Plane::from_fn(height, width, |r, c| {
            self.get(r.min(self.height - 1), c.min(self.width - 1))
        })
    }

    /// Top-left `height` x `width` window.
    pub fn crop(&self, height: usize, width: usize) -> Plane {
        assert!(height <= self.height && width <= self.width);
        Plane::from_fn(height, width, |r, c| self.get(r, c))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Planar image with samples in [0, 255].
#[derive(Clone, Debug, PartialEq)]
pub struct PixelImage {
    pub planes: Vec<Plane>,
    pub colorspace: ColorSpace,
}

impl PixelImage {
    /// Panics when the plane count does not match the colour space or the
    /// planes disagree on dimensions.
    pub fn new(planes: Vec<Plane>, colorspace: ColorSpace) -> Self {
        assert_eq!(planes.len(), colorspace.channels(), "plane count");
        let (h, w) = (planes[0].height, planes[0].width);
        assert!(
            planes.iter().all(|p| p.height == h && p.width == w),
            "planes must share dimensions"
        );
        PixelImage { planes, colorspace }
    }

    pub fn height(&self) -> usize {
        self.planes[0].height
    }

    pub fn width(&self) -> usize {
        self.planes[0].width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height(), self.width())
    }

    /// Interleaved 8-bit samples (rounded, clamped).
    pub fn to_interleaved_u8(&self) -> Vec<u8> {
        let n = self.height() * self.width();
        let mut out = Vec::with_capacity(n * self.planes.len());
        for i in 0..n {
            for p in &self.planes {
                out.push(p.data[i].round().clamp(0.0, 255.0) as u8);
            }
        }
        out
    }

    pub fn from_interleaved_u8(
        height: usize,
        width: usize,
        colorspace: ColorSpace,
        samples: &[u8],
    ) -> Self {
        let ch = colorspace.channels();
        assert_eq!(samples.len(), height * width * ch, "sample count");
        let planes = (0..ch)
            .map(|c| {
                Plane::from_vec(
                    height,
                    width,
                    samples.iter().skip(c).step_by(ch).map(|&v| v as f64).collect(),
                )
            })
            .collect();
        PixelImage { planes, colorspace }
    }

    /// Round every sample to the nearest integer and clamp to [0, 255].
    pub fn quantize_8bit(&self) -> PixelImage {
        PixelImage {
            planes: self
                .planes
                .iter()
                .map(|p| p.map(|v| v.round().clamp(0.0, 255.0)))
                .collect(),
            colorspace: self.colorspace,
        }
    }

    pub fn crop(&self, height: usize, width: usize) -> PixelImage {
        PixelImage {
            planes: self.planes.iter().map(|p| p.crop(height, width)).collect(),
            colorspace: self.colorspace,
        }
    }

    /// Sub-window starting at (`top`, `left`).
    pub fn window(&self, top: usize, left: usize, height: usize, width: usize) -> PixelImage {
        assert!(top + height <= self.height() && left + width <= self.width());
        PixelImage {
            planes: self
                .planes
                .iter()
                .map(|p| Plane::from_fn(height, width, |r, c| p.get(top + r, left + c)))
                .collect(),
            colorspace: self.colorspace,
        }
    }
}
