use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::stats;

/// Single-scale SSIM parameters. Defaults: 11×11 Gaussian window with
/// σ = 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

impl SsimParams {
    pub fn c1(&self) -> f64 {
        let v = self.k1 * self.dynamic_range;
        v * v
    }

    pub fn c2(&self) -> f64 {
        let v = self.k2 * self.dynamic_range;
        v * v
    }

    fn kernel(&self) -> Vec<f64> {
        let r = (self.window / 2) as f64;
        let g: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - r;
                libm::exp(-d * d / (2.0 * self.sigma * self.sigma))
            })
            .collect();
        let total: f64 = g.iter().sum();
        g.into_iter().map(|v| v / total).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SsimMap {
    pub width: usize,
    pub height: usize,
    /// Per-pixel SSIM; 0 where `mask` is false.
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    pub mean: f64,
    pub valid: usize,
}

/// SSIM with default parameters.
pub fn ssim(a: &Image, b: &Image) -> Result<SsimMap> {
    ssim_with(a, b, &SsimParams::default())
}

/// Windowed SSIM over the joint valid region.
///
/// RGB inputs are reduced to luma first. Each window only gathers pixels that
/// are inside the grid and valid in both images, with the Gaussian weights
/// renormalised over that support.
pub fn ssim_with(a: &Image, b: &Image, params: &SsimParams) -> Result<SsimMap> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            found: b.dims(),
        });
    }
    if params.window == 0 || params.window.is_multiple_of(2) || params.sigma.is_nan() || params.sigma <= 0.0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "ssim window {} / sigma {}",
            params.window,
            params.sigma
        )));
    }
    let a = a.to_gray();
    let b = b.to_gray();
    let (w, h) = a.dims();
    let (da, db) = (a.data(), b.data());
    let joint: Vec<bool> = a.mask().iter().zip(b.mask()).map(|(&p, &q)| p && q).collect();
    let kernel = params.kernel();
    let r = (params.window / 2) as isize;
    let (c1, c2) = (params.c1(), params.c2());

    let mut values = vec![0.0; w * h];
    let mut mask = vec![false; w * h];
    let mut valid = Vec::new();
    let mut taps: Vec<(usize, f64)> = Vec::with_capacity(params.window * params.window);
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            if !joint[p] {
                continue;
            }
            taps.clear();
            let mut wsum = 0.0;
            for (ky, gy) in kernel.iter().enumerate() {
                let yy = y as isize + ky as isize - r;
                if yy < 0 || yy >= h as isize {
                    continue;
                }
                for (kx, gx) in kernel.iter().enumerate() {
                    let xx = x as isize + kx as isize - r;
                    if xx < 0 || xx >= w as isize {
                        continue;
                    }
                    let q = yy as usize * w + xx as usize;
                    if joint[q] {
                        let wt = gy * gx;
                        taps.push((q, wt));
                        wsum += wt;
                    }
                }
            }
            let (mut ma, mut mb) = (0.0, 0.0);
            for &(q, wt) in &taps {
                ma += wt * da[q];
                mb += wt * db[q];
            }
            ma /= wsum;
            mb /= wsum;
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for &(q, wt) in &taps {
                let ea = da[q] - ma;
                let eb = db[q] - mb;
                va += wt * (ea * ea);
                vb += wt * (eb * eb);
                cov += wt * (ea * eb);
            }
            va /= wsum;
            vb /= wsum;
            cov /= wsum;
            let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
            let den = (ma * ma + mb * mb + c1) * (va + vb + c2);
            let s = num / den;
            values[p] = s;
            mask[p] = true;
            valid.push(s);
        }
    }
    if valid.is_empty() {
        return Err(Error::EmptyComparison);
    }
    let mean = stats::sum(valid.iter().copied()) / valid.len() as f64;
    Ok(SsimMap {
        width: w,
        height: h,
        values,
        mask,
        mean,
        valid: valid.len(),
    })
}
