//! Dense intensity images with a validity mask.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sample::stencil;

/// Largest supported channel count (RGB).
pub const MAX_CHANNELS: usize = 3;

/// BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Row-major image with interleaved channels and unit-range intensities.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
    mask: Vec<bool>,
}

impl Image {
    /// Builds a fully valid image.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        Self::with_mask(width, height, channels, data, vec![true; width * height])
    }

    pub fn with_mask(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f64>,
        mask: Vec<bool>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(Error::UnsupportedChannels(channels));
        }
        let pixels = width * height;
        if data.len() != pixels * channels {
            return Err(Error::LengthMismatch {
                expected: pixels * channels,
                found: data.len(),
            });
        }
        if mask.len() != pixels {
            return Err(Error::LengthMismatch {
                expected: pixels,
                found: mask.len(),
            });
        }
        for (index, &value) in data.iter().enumerate() {
            if mask[index / channels] && !(0.0..=1.0).contains(&value) {
                return Err(Error::IntensityOutOfRange { index, value });
            }
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
            mask,
        })
    }

    /// Evaluates `f(x, y, channel)` on every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn get(&self, x: usize, y: usize, channel: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + channel]
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Bilinear sample at continuous pixel coordinates `(x, y)`.
    ///
    /// Returns `None` if any contributing neighbour is outside the grid or
    /// masked. Channels beyond [`Image::channels`] are zero.
    pub fn sample(&self, x: f64, y: f64) -> Option<[f64; MAX_CHANNELS]> {
        let s = stencil(self.width, self.height, &self.mask, x, y)?;
        let mut out = [0.0; MAX_CHANNELS];
        for (c, o) in out.iter_mut().enumerate().take(self.channels) {
            *o = s.apply(|i| self.data[i * self.channels + c]);
        }
        Some(out)
    }

    /// Luma image; single-channel inputs are returned unchanged.
    pub fn to_gray(&self) -> Image {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|px| {
                let y = LUMA_WEIGHTS[0] * px[0] + LUMA_WEIGHTS[1] * px[1] + LUMA_WEIGHTS[2] * px[2];
                y.clamp(0.0, 1.0)
            })
            .collect();
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
            mask: self.mask.clone(),
        }
    }

    /// Drops `rows` rows from the bottom of the image.
    pub fn crop_bottom(&self, rows: usize) -> Result<Image> {
        if rows >= self.height {
            return Err(Error::CropTooLarge {
                rows,
                height: self.height,
            });
        }
        let height = self.height - rows;
        let pixels = self.width * height;
        Ok(Image {
            width: self.width,
            height,
            channels: self.channels,
            data: self.data[..pixels * self.channels].to_vec(),
            mask: self.mask[..pixels].to_vec(),
        })
    }

    /// Multiplies every intensity by `gain`, clamping to the unit range.
    pub fn scaled(&self, gain: f64) -> Image {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = (*v * gain).clamp(0.0, 1.0);
        }
        out
    }

    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f64>,
        mask: Vec<bool>,
    ) -> Image {
        debug_assert_eq!(data.len(), width * height * channels);
        debug_assert_eq!(mask.len(), width * height);
        Image {
            width,
            height,
            channels,
            data,
            mask,
        }
    }
}

/// A rectified stereo pair captured at one timestamp.
#[derive(Clone, Debug, PartialEq)]
pub struct StereoFrame {
    pub timestamp: f64,
    left: Image,
    right: Image,
}

impl StereoFrame {
    pub fn new(timestamp: f64, left: Image, right: Image) -> Result<Self> {
        if left.dims() != right.dims() {
            return Err(Error::DimensionMismatch {
                expected: left.dims(),
                found: right.dims(),
            });
        }
        Ok(Self {
            timestamp,
            left,
            right,
        })
    }

    pub fn left(&self) -> &Image {
        &self.left
    }

    pub fn right(&self) -> &Image {
        &self.right
    }
}
