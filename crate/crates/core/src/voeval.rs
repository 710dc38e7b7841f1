//! Trajectory association and relative / absolute trajectory errors.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::se3::{compose, norm, relative, rotation_angle, sub, to_degrees, Pose, Trajectory, UnitQuaternion, Vec3};
use crate::stats;

/// Segment lengths in meters used by default for relative errors.
pub const DEFAULT_LENGTHS: [f64; 8] = [100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0];

/// Greedy nearest-timestamp matching.
///
/// Candidate pairs within `max_dt` are accepted in order of increasing
/// `|Δt|`, each sample used at most once; ties go to the earlier estimate.
/// The result is sorted by ground-truth index.
pub fn associate(gt: &Trajectory, est: &Trajectory, max_dt: f64) -> Result<Vec<(usize, usize)>> {
    if max_dt.is_nan() || max_dt < 0.0 {
        return Err(Error::InvalidParameter(alloc::format!("max_dt = {max_dt}")));
    }
    let (tg, te) = (gt.timestamps(), est.timestamps());
    let mut candidates = Vec::new();
    for (i, &t) in tg.iter().enumerate() {
        let lo = te.partition_point(|&s| s < t - max_dt);
        for (j, &s) in te.iter().enumerate().skip(lo) {
            let dt = libm::fabs(s - t);
            if s > t + max_dt {
                break;
            }
            if dt <= max_dt {
                candidates.push((dt, j, i));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut gt_used = vec![false; tg.len()];
    let mut est_used = vec![false; te.len()];
    let mut pairs = Vec::new();
    for (_, j, i) in candidates {
        if !gt_used[i] && !est_used[j] {
            gt_used[i] = true;
            est_used[j] = true;
            pairs.push((i, j));
        }
    }
    if pairs.is_empty() {
        return Err(Error::NoMatches { max_dt });
    }
    pairs.sort_unstable();
    Ok(pairs)
}

/// Index-aligned ground-truth and estimated poses after association.
#[derive(Clone, Debug, PartialEq)]
pub struct Associated {
    pub timestamps: Vec<f64>,
    pub gt: Vec<Pose>,
    pub est: Vec<Pose>,
}

impl Associated {
    pub fn new(gt: &Trajectory, est: &Trajectory, pairs: &[(usize, usize)]) -> Self {
        Self {
            timestamps: pairs.iter().map(|&(i, _)| gt.timestamps()[i]).collect(),
            gt: pairs.iter().map(|&(i, _)| gt.poses()[i]).collect(),
            est: pairs.iter().map(|&(_, j)| est.poses()[j]).collect(),
        }
    }
}

/// Cumulative distance travelled: `out[k]` is the path length from 0 to `k`.
pub fn cumulative_lengths(poses: &[Pose]) -> Vec<f64> {
    let mut out = Vec::with_capacity(poses.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in poses.windows(2) {
        acc += norm(sub(w[1].translation, w[0].translation));
        out.push(acc);
    }
    out
}

/// Sum of consecutive translation distances from `i` to `j` (`i ≤ j`).
pub fn path_length(poses: &[Pose], i: usize, j: usize) -> f64 {
    assert!(i <= j, "path_length requires i <= j");
    poses[i..=j]
        .windows(2)
        .map(|w| norm(sub(w[1].translation, w[0].translation)))
        .sum()
}

/// Frame pairs whose ground-truth path length first reaches `length`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairSet {
    pub length: f64,
    pub pairs: Vec<(usize, usize)>,
}

/// For each start index (every `stride` frames) and each target length, the
/// smallest `j` with `path_length(i, j) ≥ length`. Unreachable lengths yield
/// empty sets; it is an error if every set is empty.
pub fn build_pairs(gt: &[Pose], lengths: &[f64], stride: usize) -> Result<Vec<PairSet>> {
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be positive".into()));
    }
    if let Some(&l) = lengths.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidParameter(alloc::format!("segment length {l}")));
    }
    let cum = cumulative_lengths(gt);
    let sets: Vec<PairSet> = lengths
        .iter()
        .map(|&length| {
            let pairs = (0..gt.len())
                .step_by(stride)
                .filter_map(|i| {
                    let target = cum[i] + length;
                    let j = i + cum[i..].partition_point(|&c| c < target);
                    (j < gt.len()).then_some((i, j))
                })
                .collect();
            PairSet { length, pairs }
        })
        .collect();
    if sets.iter().all(|s| s.pairs.is_empty()) {
        return Err(Error::NoPairs);
    }
    Ok(sets)
}

/// Relative error of one segment length.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinErrors {
    pub length: f64,
    pub pairs: usize,
    /// Percent.
    pub t_rel: f64,
    /// Degrees per 100 m.
    pub r_rel: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RelativeErrors {
    /// Mean of per-pair translation error over segment length, in percent.
    pub t_rel: f64,
    /// Mean of per-pair rotation error over segment length, in degrees per 100 m.
    pub r_rel: f64,
    /// Unnormalised mean translation error, meters.
    pub t_rel_raw: f64,
    /// Unnormalised mean rotation error, degrees.
    pub r_rel_raw: f64,
    pub pairs: usize,
    /// Non-empty bins only.
    pub bins: Vec<BinErrors>,
}

/// Error pose `(p̂_j ⊖ p̂_i) ⊖ (p_j ⊖ p_i)` of one pair.
pub fn pair_error(gt: &[Pose], est: &[Pose], i: usize, j: usize) -> Pose {
    relative(&relative(&gt[i], &gt[j]), &relative(&est[i], &est[j]))
}

/// Length-normalised relative errors over the given pair sets.
///
/// `gt` and `est` must be index-aligned (see [`Associated`]).
pub fn relative_errors(gt: &[Pose], est: &[Pose], pair_sets: &[PairSet]) -> Result<RelativeErrors> {
    if gt.len() != est.len() {
        return Err(Error::LengthMismatch {
            expected: gt.len(),
            found: est.len(),
        });
    }
    let cum = cumulative_lengths(gt);
    let (mut t_norm, mut r_norm, mut t_raw, mut r_raw) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut bins = Vec::new();
    for set in pair_sets {
        let start = t_norm.len();
        for &(i, j) in &set.pairs {
            if i >= j || j >= gt.len() {
                return Err(Error::InvalidParameter(alloc::format!("pair ({i}, {j})")));
            }
            let e = pair_error(gt, est, i, j);
            let len = cum[j] - cum[i];
            let t = norm(e.translation);
            let r = to_degrees(rotation_angle(&e));
            t_raw.push(t);
            r_raw.push(r);
            t_norm.push(100.0 * t / len);
            r_norm.push(100.0 * r / len);
        }
        if t_norm.len() > start {
            bins.push(BinErrors {
                length: set.length,
                pairs: t_norm.len() - start,
                t_rel: stats::mean(&t_norm[start..]).unwrap_or(0.0),
                r_rel: stats::mean(&r_norm[start..]).unwrap_or(0.0),
            });
        }
    }
    let (Some(t_rel), Some(r_rel)) = (stats::mean(&t_norm), stats::mean(&r_norm)) else {
        return Err(Error::NoPairs);
    };
    Ok(RelativeErrors {
        t_rel,
        r_rel,
        t_rel_raw: stats::mean(&t_raw).unwrap_or(0.0),
        r_rel_raw: stats::mean(&r_raw).unwrap_or(0.0),
        pairs: t_norm.len(),
        bins,
    })
}

/// Rigid transform `T` (no scale) minimising `Σ ‖dst_k − T(src_k)‖²`.
pub fn rigid_alignment(src: &[Vec3], dst: &[Vec3]) -> Result<Pose> {
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch {
            expected: src.len(),
            found: dst.len(),
        });
    }
    if src.len() < 3 {
        return Err(Error::DegenerateAlignment("fewer than 3 points"));
    }
    let n = src.len() as f64;
    let centroid = |pts: &[Vec3]| -> Vector3<f64> {
        let c: [f64; 3] = core::array::from_fn(|k| stats::sum(pts.iter().map(|p| p[k])) / n);
        Vector3::from(c)
    };
    let (mu_s, mu_d) = (centroid(src), centroid(dst));
    let mut h = Matrix3::zeros();
    for (s, d) in src.iter().zip(dst) {
        h += (Vector3::from(*d) - mu_d) * (Vector3::from(*s) - mu_s).transpose();
    }
    let svd = h.svd(true, true);
    let mut sv: [f64; 3] = [svd.singular_values[0], svd.singular_values[1], svd.singular_values[2]];
    sv.sort_unstable_by(|a, b| b.total_cmp(a));
    if sv[0].is_nan() || sv[0] <= 0.0 || sv[1] <= 1e-10 * sv[0] {
        return Err(Error::DegenerateAlignment("points are collinear"));
    }
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut d = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let r = u * d * v_t;
    let t = mu_d - r * mu_s;
    let rows: [[f64; 3]; 3] = core::array::from_fn(|i| core::array::from_fn(|j| r[(i, j)]));
    Ok(Pose::new(UnitQuaternion::from_matrix(&rows)?, [t[0], t[1], t[2]]))
}

/// Absolute trajectory errors.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AbsoluteErrors {
    /// Translation RMSE, meters.
    pub t_abs: f64,
    /// Rotation RMSE, degrees.
    pub r_abs: f64,
    /// Transform applied to the estimate (identity without alignment).
    pub alignment: Pose,
}

/// RMSE of translation residuals and of per-pose rotation angles, optionally
/// after rigidly aligning `est` onto `gt`.
pub fn absolute_rmse(gt: &[Pose], est: &[Pose], align: bool) -> Result<AbsoluteErrors> {
    if gt.len() != est.len() {
        return Err(Error::LengthMismatch {
            expected: gt.len(),
            found: est.len(),
        });
    }
    if gt.is_empty() {
        return Err(Error::Empty("trajectory"));
    }
    let alignment = if align {
        let src: Vec<Vec3> = est.iter().map(|p| p.translation).collect();
        let dst: Vec<Vec3> = gt.iter().map(|p| p.translation).collect();
        rigid_alignment(&src, &dst)?
    } else {
        Pose::IDENTITY
    };
    let mut t_err = Vec::with_capacity(gt.len());
    let mut r_err = Vec::with_capacity(gt.len());
    for (g, e) in gt.iter().zip(est) {
        let aligned = if align { compose(&alignment, e) } else { *e };
        t_err.push(norm(sub(g.translation, aligned.translation)));
        r_err.push(to_degrees(rotation_angle(&relative(g, &aligned))));
    }
    Ok(AbsoluteErrors {
        t_abs: stats::rms(&t_err).unwrap_or(0.0),
        r_abs: stats::rms(&r_err).unwrap_or(0.0),
        alignment,
    })
}

/// Unit of the reported `r_rel`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RotationUnit {
    #[default]
    DegPer100m,
    Deg,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub lengths: Vec<f64>,
    pub stride: usize,
    pub max_dt: f64,
    pub align: bool,
    pub rotation_unit: RotationUnit,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            lengths: DEFAULT_LENGTHS.to_vec(),
            stride: 1,
            max_dt: 0.02,
            align: false,
            rotation_unit: RotationUnit::DegPer100m,
        }
    }
}

/// Trajectory metrics of one estimate.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VoMetrics {
    /// Percent.
    pub t_rel: f64,
    /// Degrees per 100 m, or degrees with [`RotationUnit::Deg`].
    pub r_rel: f64,
    pub r_rel_unit: RotationUnit,
    /// Meters.
    pub t_rel_raw: f64,
    /// Degrees.
    pub r_rel_raw: f64,
    /// Meters.
    pub t_abs: f64,
    /// Degrees.
    pub r_abs: f64,
    pub pairs: usize,
    pub bins_used: usize,
    pub matched: usize,
    pub bins: Vec<BinErrors>,
}

/// Associates, builds length-binned pairs and computes every metric.
pub fn evaluate(gt: &Trajectory, est: &Trajectory, config: &EvalConfig) -> Result<VoMetrics> {
    let matches = associate(gt, est, config.max_dt)?;
    let assoc = Associated::new(gt, est, &matches);
    let sets = build_pairs(&assoc.gt, &config.lengths, config.stride)?;
    let rel = relative_errors(&assoc.gt, &assoc.est, &sets)?;
    let abs = absolute_rmse(&assoc.gt, &assoc.est, config.align)?;
    Ok(VoMetrics {
        t_rel: rel.t_rel,
        r_rel: match config.rotation_unit {
            RotationUnit::DegPer100m => rel.r_rel,
            RotationUnit::Deg => rel.r_rel_raw,
        },
        r_rel_unit: config.rotation_unit,
        t_rel_raw: rel.t_rel_raw,
        r_rel_raw: rel.r_rel_raw,
        t_abs: abs.t_abs,
        r_abs: abs.r_abs,
        pairs: rel.pairs,
        bins_used: rel.bins.len(),
        matched: matches.len(),
        bins: rel.bins,
    })
}
