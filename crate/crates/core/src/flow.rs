//! Dense optical-flow fields and the operators built on them.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{Image, MAX_CHANNELS};
use crate::sample::stencil;
use crate::stats;

/// Per-pixel displacement `(u, v)` in pixels, anchored on the field's own grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f64>,
    v: Vec<f64>,
    mask: Vec<bool>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Self::with_mask(width, height, u, v, vec![true; width * height])
    }

    pub fn with_mask(
        width: usize,
        height: usize,
        u: Vec<f64>,
        v: Vec<f64>,
        mask: Vec<bool>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        let n = width * height;
        for len in [u.len(), v.len(), mask.len()] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        for i in 0..n {
            if mask[i] && !(u[i].is_finite() && v[i].is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self {
            width,
            height,
            u,
            v,
            mask,
        })
    }

    /// Builds a field from `f(x, y)`; `None` marks an invalid cell.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Option<(f64, f64)>,
    ) -> Result<Self> {
        let n = width * height;
        let (mut u, mut v, mut mask) = (vec![0.0; n], vec![0.0; n], vec![false; n]);
        for y in 0..height {
            for x in 0..width {
                if let Some((du, dv)) = f(x, y) {
                    let i = y * width + x;
                    u[i] = du;
                    v[i] = dv;
                    mask[i] = true;
                }
            }
        }
        Self::with_mask(width, height, u, v, mask)
    }

    pub fn constant(width: usize, height: usize, du: f64, dv: f64) -> Result<Self> {
        let n = width * height;
        Self::new(width, height, vec![du; n], vec![dv; n])
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::constant(width, height, 0.0, 0.0)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Stored vector at a grid cell, or `None` if the cell is masked.
    pub fn get(&self, x: usize, y: usize) -> Option<(f64, f64)> {
        let i = y * self.width + x;
        self.mask[i].then(|| (self.u[i], self.v[i]))
    }

    /// Bilinear sample of both components.
    pub fn sample(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let s = stencil(self.width, self.height, &self.mask, x, y)?;
        Some((s.apply(|i| self.u[i]), s.apply(|i| self.v[i])))
    }

    pub fn crop_bottom(&self, rows: usize) -> Result<FlowField> {
        if rows >= self.height {
            return Err(Error::CropTooLarge {
                rows,
                height: self.height,
            });
        }
        let height = self.height - rows;
        let n = self.width * height;
        Ok(FlowField {
            width: self.width,
            height,
            u: self.u[..n].to_vec(),
            v: self.v[..n].to_vec(),
            mask: self.mask[..n].to_vec(),
        })
    }

    /// Adds a constant displacement to every valid cell.
    pub fn offset(&self, du: f64, dv: f64) -> FlowField {
        let mut out = self.clone();
        for i in 0..out.u.len() {
            if out.mask[i] {
                out.u[i] += du;
                out.v[i] += dv;
            }
        }
        out
    }

    pub(crate) fn raw_parts(&self) -> (&[f64], &[f64], &[bool]) {
        (&self.u, &self.v, &self.mask)
    }
}

fn check_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Backward warp: `out(p) = src(p + flow(p))`, sampled bilinearly.
///
/// Output pixels are masked where the flow is masked or the sample position
/// is out of bounds or touches a masked source pixel; masked pixels hold 0.
pub fn warp_backward(src: &Image, flow: &FlowField) -> Result<Image> {
    check_dims(src.dims(), flow.dims())?;
    let (w, h, c) = (src.width(), src.height(), src.channels());
    let mut data = vec![0.0; w * h * c];
    let mut mask = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let Some((du, dv)) = flow.get(x, y) else {
                continue;
            };
            if let Some(px) = src.sample(x as f64 + du, y as f64 + dv) {
                let i = y * w + x;
                data[i * c..(i + 1) * c].copy_from_slice(&px[..c.min(MAX_CHANNELS)]);
                mask[i] = true;
            }
        }
    }
    Ok(Image::from_parts_unchecked(w, h, c, data, mask))
}

/// Flow addition: `(w1 ⊕ w2)(p) = w1(p) + w2(p + w1(p))`, with `w2` sampled
/// bilinearly. The result lives on the grid of `w1`.
pub fn compose_flows(w1: &FlowField, w2: &FlowField) -> Result<FlowField> {
    check_dims(w1.dims(), w2.dims())?;
    let (w, h) = w1.dims();
    let n = w * h;
    let (mut u, mut v, mut mask) = (vec![0.0; n], vec![0.0; n], vec![false; n]);
    for y in 0..h {
        for x in 0..w {
            let Some((u1, v1)) = w1.get(x, y) else {
                continue;
            };
            if let Some((u2, v2)) = w2.sample(x as f64 + u1, y as f64 + v1) {
                let i = y * w + x;
                u[i] = u1 + u2;
                v[i] = v1 + v2;
                mask[i] = true;
            }
        }
    }
    Ok(FlowField {
        width: w,
        height: h,
        u,
        v,
        mask,
    })
}

/// Summary of an endpoint-error comparison over the valid pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpeStats {
    pub mean: f64,
    pub median: f64,
    /// Number of pixels that entered the statistics.
    pub valid: usize,
    /// Sum of per-pixel errors, kept for pooling across frames.
    pub sum: f64,
}

impl EpeStats {
    /// Statistics of a list of per-pixel errors.
    pub fn from_errors(errors: &[f64]) -> Result<Self> {
        let (Some(_), Some(median)) = (stats::mean(errors), stats::median(errors)) else {
            return Err(Error::EmptyComparison);
        };
        let sum = stats::sum(errors.iter().copied());
        Ok(Self {
            mean: sum / errors.len() as f64,
            median,
            valid: errors.len(),
            sum,
        })
    }
}

/// Per-pixel endpoint-error map plus its statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct EpeMap {
    pub width: usize,
    pub height: usize,
    /// `‖w1 − w2‖₂` on valid pixels, 0 elsewhere.
    pub errors: Vec<f64>,
    pub mask: Vec<bool>,
    pub stats: EpeStats,
}

/// Endpoint error on the intersection of both masks.
pub fn epe(w1: &FlowField, w2: &FlowField) -> Result<EpeMap> {
    check_dims(w1.dims(), w2.dims())?;
    let n = w1.width * w1.height;
    let mut errors = vec![0.0; n];
    let mut mask = vec![false; n];
    let mut valid = Vec::with_capacity(n);
    for i in 0..n {
        if w1.mask[i] && w2.mask[i] {
            let du = w1.u[i] - w2.u[i];
            let dv = w1.v[i] - w2.v[i];
            let e = libm::sqrt(du * du + dv * dv);
            errors[i] = e;
            mask[i] = true;
            valid.push(e);
        }
    }
    let stats = EpeStats::from_errors(&valid)?;
    Ok(EpeMap {
        width: w1.width,
        height: w1.height,
        errors,
        mask,
        stats,
    })
}
