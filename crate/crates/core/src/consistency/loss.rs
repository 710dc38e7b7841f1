use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flow::{warp_backward, FlowField};
use crate::image::Image;
use crate::stats;

use super::ssim::ssim;

/// Loss weights and the SSIM/L1 mixing factor.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossWeights {
    pub adv: f64,
    pub cy: f64,
    pub tmp: f64,
    pub st: f64,
    pub alpha: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            adv: 1.0,
            cy: 10.0,
            tmp: 3.0,
            st: 3.0,
            alpha: 0.8,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("adv", self.adv), ("cy", self.cy), ("tmp", self.tmp), ("st", self.st)] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("weight {name} = {w}")));
            }
        }
        check_alpha(self.alpha)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(())
}

/// `α(1 − SSIM)/2 + (1 − α)|a − b|`, both parts reduced by a mean over the
/// pixels valid in both images. L1 is averaged across channels.
pub fn image_consistency(a: &Image, b: &Image, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if a.channels() != b.channels() {
        return Err(Error::InvalidParameter(format!(
            "channel mismatch: {} vs {}",
            a.channels(),
            b.channels()
        )));
    }
    let s = ssim(a, b)?;
    let c = a.channels();
    let (da, db) = (a.data(), b.data());
    let mut diffs = Vec::with_capacity(s.valid);
    for (p, &valid) in s.mask.iter().enumerate() {
        if valid {
            let d = stats::sum((0..c).map(|k| libm::fabs(da[p * c + k] - db[p * c + k])));
            diffs.push(d / c as f64);
        }
    }
    let l1 = stats::mean(&diffs).ok_or(Error::EmptyComparison)?;
    let structural = ((1.0 - s.mean) / 2.0).clamp(0.0, 1.0);
    Ok(alpha * structural + (1.0 - alpha) * l1)
}

/// Cycle reconstruction loss, `𝓕(x, x_recon)`.
pub fn cycle_loss(x: &Image, x_recon: &Image, alpha: f64) -> Result<f64> {
    image_consistency(x, x_recon, alpha)
}

/// `𝓕(ω(prev), curr)` where `ω` backward-warps `prev` with `flow`, which
/// lives on the grid of `curr`.
pub fn temporal_loss(prev: &Image, curr: &Image, flow: &FlowField, alpha: f64) -> Result<f64> {
    let warped = warp_backward(prev, flow)?;
    image_consistency(&warped, curr, alpha)
}

/// `𝓕(ω(right), left)` where `flow` lives on the grid of `left`.
pub fn stereo_loss(right: &Image, left: &Image, flow_r_to_l: &FlowField, alpha: f64) -> Result<f64> {
    let warped = warp_backward(right, flow_r_to_l)?;
    image_consistency(&warped, left, alpha)
}

/// Patch-discriminator response grid.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreMap {
    width: usize,
    height: usize,
    scores: Vec<f64>,
}

impl ScoreMap {
    pub fn new(width: usize, height: usize, scores: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Empty("score map"));
        }
        if scores.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                found: scores.len(),
            });
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            width,
            height,
            scores,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, alloc::vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    fn mean_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        stats::sum(self.scores.iter().map(|&s| f(s))) / self.scores.len() as f64
    }
}

/// Least-squares adversarial terms.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdversarialLoss {
    /// `mean (D(fake) − 1)²`
    pub generator: f64,
    /// `mean (D(real) − 1)² + mean D(fake)²`
    pub discriminator: f64,
    /// `generator + discriminator`
    pub total: f64,
}

pub fn adversarial_loss(fake: &ScoreMap, real: &ScoreMap) -> Result<AdversarialLoss> {
    let generator = fake.mean_of(|s| (s - 1.0) * (s - 1.0));
    let discriminator = real.mean_of(|s| (s - 1.0) * (s - 1.0)) + fake.mean_of(|s| s * s);
    Ok(AdversarialLoss {
        generator,
        discriminator,
        total: generator + discriminator,
    })
}

/// Unweighted loss components.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossTerms {
    pub adv: f64,
    pub cy: f64,
    pub tmp: f64,
    pub st: f64,
}

/// `λ_adv·adv + λ_cy·cy + λ_tmp·tmp + λ_st·st`
pub fn total_loss(terms: &LossTerms, weights: &LossWeights) -> f64 {
    weights.adv * terms.adv + weights.cy * terms.cy + weights.tmp * terms.tmp + weights.st * terms.st
}
