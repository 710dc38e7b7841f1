//! Rigid-body poses, trajectories and pose interpolation.
//!
//! Quaternions are stored as `(w, x, y, z)` with the canonical sign `w ≥ 0`.
//! `compose(a, b)` applies `b` first, then `a`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnitQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalises and canonicalises `(w, x, y, z)`.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = libm::sqrt(w * w + x * x + y * y + z * z);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "quaternion ({w}, {x}, {y}, {z}) cannot be normalised"
            )));
        }
        Ok(Self::canonical(w / n, x / n, y / n, z / n))
    }

    /// Rotation of `angle` radians about `axis` (normalised here).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let n = norm(axis);
        if n == 0.0 || angle == 0.0 {
            return Self::IDENTITY;
        }
        let s = libm::sin(0.5 * angle) / n;
        Self::canonical(libm::cos(0.5 * angle), axis[0] * s, axis[1] * s, axis[2] * s)
    }

    /// Rotation from a (proper, orthonormal) rotation matrix.
    pub fn from_matrix(m: &Mat3) -> Result<Self> {
        let trace = m[0][0] + m[1][1] + m[2][2];
        let (w, x, y, z) = if trace > 0.0 {
            let s = 2.0 * libm::sqrt(trace + 1.0);
            (0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s)
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = 2.0 * libm::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]);
            ((m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s)
        } else if m[1][1] > m[2][2] {
            let s = 2.0 * libm::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]);
            ((m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s)
        } else {
            let s = 2.0 * libm::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]);
            ((m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s)
        };
        Self::new(w, x, y, z)
    }

    fn canonical(w: f64, x: f64, y: f64, z: f64) -> Self {
        let flip = w < 0.0 || (w == 0.0 && first_nonzero_negative(x, y, z));
        if flip {
            Self { w: -w, x: -x, y: -y, z: -z }
        } else {
            Self { w, x, y, z }
        }
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn wxyz(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn conjugate(&self) -> Self {
        Self::canonical(self.w, -self.x, -self.y, -self.z)
    }

    /// Hamilton product, renormalised.
    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = (self, o);
        let w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z;
        // grouped so that q* q cancels exactly
        let x = (a.w * b.x + a.x * b.w) + (a.y * b.z - a.z * b.y);
        let y = (a.w * b.y + a.y * b.w) + (a.z * b.x - a.x * b.z);
        let z = (a.w * b.z + a.z * b.w) + (a.x * b.y - a.y * b.x);
        let n = libm::sqrt(w * w + x * x + y * y + z * z);
        Self::canonical(w / n, x / n, y / n, z / n)
    }

    pub fn rotate(&self, v: Vec3) -> Vec3 {
        let m = self.to_matrix();
        mat_vec(&m, v)
    }

    pub fn to_matrix(&self) -> Mat3 {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        let v = libm::sqrt(self.x * self.x + self.y * self.y + self.z * self.z);
        2.0 * libm::atan2(v, libm::fabs(self.w))
    }

    fn dot(&self, o: &Self) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Shortest-arc spherical interpolation; `s = 0` gives `self`.
    pub fn slerp(&self, other: &Self, s: f64) -> Self {
        let mut q1 = other.wxyz();
        let mut d = self.dot(other);
        if d < 0.0 {
            q1 = q1.map(|c| -c);
            d = -d;
        }
        let q0 = self.wxyz();
        let (w0, w1) = if d > 1.0 - 1e-12 {
            (1.0 - s, s)
        } else {
            let theta = libm::acos(d.min(1.0));
            let sin_theta = libm::sin(theta);
            (libm::sin((1.0 - s) * theta) / sin_theta, libm::sin(s * theta) / sin_theta)
        };
        let q: [f64; 4] = core::array::from_fn(|i| w0 * q0[i] + w1 * q1[i]);
        let n = libm::sqrt(q.iter().map(|c| c * c).sum::<f64>());
        Self::canonical(q[0] / n, q[1] / n, q[2] / n, q[3] / n)
    }
}

fn first_nonzero_negative(x: f64, y: f64, z: f64) -> bool {
    [x, y, z].into_iter().find(|&c| c != 0.0).is_some_and(|c| c < 0.0)
}

pub(crate) fn norm(v: Vec3) -> f64 {
    libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    core::array::from_fn(|r| m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2])
}

/// Rigid transform `x ↦ R x + t`; translation in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pose {
    pub rotation: UnitQuaternion,
    pub translation: Vec3,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        rotation: UnitQuaternion::IDENTITY,
        translation: [0.0; 3],
    };

    pub fn new(rotation: UnitQuaternion, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self::new(UnitQuaternion::IDENTITY, translation)
    }

    /// From the upper 3×4 block of a homogeneous matrix.
    pub fn from_matrix_3x4(m: &[[f64; 4]; 3]) -> Result<Self> {
        let r: Mat3 = core::array::from_fn(|i| [m[i][0], m[i][1], m[i][2]]);
        Ok(Self::new(UnitQuaternion::from_matrix(&r)?, [m[0][3], m[1][3], m[2][3]]))
    }

    pub fn to_matrix_3x4(&self) -> [[f64; 4]; 3] {
        let r = self.rotation.to_matrix();
        core::array::from_fn(|i| [r[i][0], r[i][1], r[i][2], self.translation[i]])
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.rotation.conjugate();
        let t = inv.rotate(self.translation);
        Pose::new(inv, [-t[0], -t[1], -t[2]])
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        add(self.rotation.rotate(p), self.translation)
    }
}

/// `a ∘ b`: apply `b`, then `a`.
pub fn compose(a: &Pose, b: &Pose) -> Pose {
    Pose::new(a.rotation.mul(&b.rotation), a.transform_point(b.translation))
}

/// Inverse-compositional difference `p_j ⊖ p_i = p_i⁻¹ ∘ p_j`: the motion
/// from `i` to `j` expressed in frame `i`.
pub fn relative(p_i: &Pose, p_j: &Pose) -> Pose {
    compose(&p_i.inverse(), p_j)
}

/// Rotation angle of a pose in radians, in `[0, π]`.
pub fn rotation_angle(p: &Pose) -> f64 {
    p.rotation.angle()
}

/// `R = Rz(yaw)·Ry(pitch)·Rx(roll)`, i.e. extrinsic rotations about X, then
/// Y, then Z.
pub fn euler_rpy_to_pose(roll: f64, pitch: f64, yaw: f64, translation: Vec3) -> Pose {
    let qx = UnitQuaternion::from_axis_angle([1.0, 0.0, 0.0], roll);
    let qy = UnitQuaternion::from_axis_angle([0.0, 1.0, 0.0], pitch);
    let qz = UnitQuaternion::from_axis_angle([0.0, 0.0, 1.0], yaw);
    Pose::new(qz.mul(&qy).mul(&qx), translation)
}

/// Timestamped poses with strictly increasing, finite timestamps.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    timestamps: Vec<f64>,
    poses: Vec<Pose>,
}

impl Trajectory {
    pub fn new(timestamps: Vec<f64>, poses: Vec<Pose>) -> Result<Self> {
        if timestamps.is_empty() {
            return Err(Error::Empty("trajectory"));
        }
        if timestamps.len() != poses.len() {
            return Err(Error::LengthMismatch {
                expected: timestamps.len(),
                found: poses.len(),
            });
        }
        if let Some(i) = timestamps.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotonicTimestamps(i + 1));
        }
        Ok(Self { timestamps, poses })
    }

    pub fn from_samples(samples: impl IntoIterator<Item = (f64, Pose)>) -> Result<Self> {
        let (timestamps, poses) = samples.into_iter().unzip();
        Self::new(timestamps, poses)
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn start(&self) -> f64 {
        self.timestamps[0]
    }

    pub fn end(&self) -> f64 {
        self.timestamps[self.timestamps.len() - 1]
    }

    /// Applies `g ∘ p` to every pose.
    pub fn left_multiplied(&self, g: &Pose) -> Trajectory {
        Trajectory {
            timestamps: self.timestamps.clone(),
            poses: self.poses.iter().map(|p| compose(g, p)).collect(),
        }
    }

    /// Keeps samples whose index satisfies `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(usize) -> bool) -> Result<Trajectory> {
        let (timestamps, poses) = self
            .timestamps
            .iter()
            .zip(&self.poses)
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, (&t, &p))| (t, p))
            .unzip();
        Trajectory::new(timestamps, poses)
    }
}

/// Pose at time `t`: linear translation and shortest-arc slerp between the
/// bracketing samples. A sample's own timestamp returns that sample verbatim.
pub fn interpolate(traj: &Trajectory, t: f64) -> Result<Pose> {
    let ts = &traj.timestamps;
    if !(t >= traj.start() && t <= traj.end()) {
        return Err(Error::Extrapolation {
            t,
            start: traj.start(),
            end: traj.end(),
        });
    }
    let k = ts.partition_point(|&s| s <= t);
    if ts[k - 1] == t {
        return Ok(traj.poses[k - 1]);
    }
    let (t0, t1) = (ts[k - 1], ts[k]);
    let (a, b) = (&traj.poses[k - 1], &traj.poses[k]);
    let s = (t - t0) / (t1 - t0);
    let translation = core::array::from_fn(|i| a.translation[i] + s * (b.translation[i] - a.translation[i]));
    Ok(Pose::new(a.rotation.slerp(&b.rotation, s), translation))
}

/// Degrees from radians.
pub fn to_degrees(rad: f64) -> f64 {
    rad * 180.0 / PI
}
