//! Synthetic stereo sequences with analytic flows and trajectories.
//!
//! The scene is a band-limited texture moved by one affine map `M` per frame:
//! a point at `p` in frame `t` appears at `M(p)` in frame `t + 1`, so the left
//! image is `L_t(q) = g_t · T(M⁻ᵗ q)` for texture `T` and flicker gain `g_t`.
//! The right camera sees the left view shifted by the disparity,
//! `R_t(q) = L_t(q − (d, 0))`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::consistency::{FlowDirection, FrameFlows};
use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::image::{Image, StereoFrame};
use crate::se3::{compose, norm, relative, Pose, Trajectory, UnitQuaternion};

/// Planar affine map `p ↦ A p + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine2 {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
}

impl Affine2 {
    pub const IDENTITY: Affine2 = Affine2 {
        a: [[1.0, 0.0], [0.0, 1.0]],
        b: [0.0, 0.0],
    };

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self {
            b: [dx, dy],
            ..Self::IDENTITY
        }
    }

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.a[0][0] * p[0] + self.a[0][1] * p[1] + self.b[0],
            self.a[1][0] * p[0] + self.a[1][1] * p[1] + self.b[1],
        ]
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn after(&self, inner: &Affine2) -> Affine2 {
        let a = &self.a;
        let i = &inner.a;
        Affine2 {
            a: [
                [a[0][0] * i[0][0] + a[0][1] * i[1][0], a[0][0] * i[0][1] + a[0][1] * i[1][1]],
                [a[1][0] * i[0][0] + a[1][1] * i[1][0], a[1][0] * i[0][1] + a[1][1] * i[1][1]],
            ],
            b: self.apply(inner.b),
        }
    }

    pub fn inverse(&self) -> Option<Affine2> {
        let a = &self.a;
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let b = [
            -(inv[0][0] * self.b[0] + inv[0][1] * self.b[1]),
            -(inv[1][0] * self.b[0] + inv[1][1] * self.b[1]),
        ];
        Some(Affine2 { a: inv, b })
    }

    /// `n`-fold composition.
    pub fn pow(&self, n: usize) -> Affine2 {
        (0..n).fold(Affine2::IDENTITY, |acc, _| self.after(&acc))
    }

    /// The displacement field `p ↦ self(p) − p`, masked where the target
    /// falls outside the grid.
    pub fn flow_field(&self, width: usize, height: usize) -> Result<FlowField> {
        let (xmax, ymax) = ((width - 1) as f64, (height - 1) as f64);
        FlowField::from_fn(width, height, |x, y| {
            let p = [x as f64, y as f64];
            let q = self.apply(p);
            let inside = q[0] >= 0.0 && q[1] >= 0.0 && q[0] <= xmax && q[1] <= ymax;
            inside.then(|| (q[0] - p[0], q[1] - p[1]))
        })
    }
}

/// Per-frame similarity motion about the image centre.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct AffineMotion {
    /// Pixels per frame.
    pub translation: [f64; 2],
    /// Radians per frame.
    pub rotation: f64,
    /// Scale factor per frame.
    pub scale: f64,
}

impl Default for AffineMotion {
    fn default() -> Self {
        Self {
            translation: [1.0, 0.5],
            rotation: 0.002,
            scale: 1.0,
        }
    }
}

impl AffineMotion {
    pub fn to_affine(&self, width: usize, height: usize) -> Affine2 {
        let c = [(width - 1) as f64 / 2.0, (height - 1) as f64 / 2.0];
        let (s, r) = (self.scale, self.rotation);
        let (cr, sr) = (libm::cos(r), libm::sin(r));
        let a = [[s * cr, -s * sr], [s * sr, s * cr]];
        let mc = [a[0][0] * c[0] + a[0][1] * c[1], a[1][0] * c[0] + a[1][1] * c[1]];
        Affine2 {
            a,
            b: [c[0] - mc[0] + self.translation[0], c[1] - mc[1] + self.translation[1]],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum PathShape {
    /// Along the camera's +z axis.
    Straight,
    /// Turning right in the x–z plane.
    Circle { circumference: f64 },
}

/// Parametric camera path sampled at a fixed frame rate.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct PathSpec {
    pub shape: PathShape,
    /// Meters per second.
    pub speed: f64,
    /// Frames per second.
    pub fps: f64,
}

impl Default for PathSpec {
    fn default() -> Self {
        Self {
            shape: PathShape::Straight,
            speed: 10.0,
            fps: 10.0,
        }
    }
}

impl PathSpec {
    pub fn pose_at(&self, t: f64) -> Pose {
        let s = self.speed * t;
        match self.shape {
            PathShape::Straight => Pose::from_translation([0.0, 0.0, s]),
            PathShape::Circle { circumference } => {
                let radius = circumference / (2.0 * PI);
                let theta = s / radius;
                Pose::new(
                    UnitQuaternion::from_axis_angle([0.0, 1.0, 0.0], theta),
                    [radius * (1.0 - libm::cos(theta)), 0.0, radius * libm::sin(theta)],
                )
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.speed >= 0.0
            && self.speed.is_finite()
            && self.fps > 0.0
            && self.fps.is_finite()
            && match self.shape {
                PathShape::Straight => true,
                PathShape::Circle { circumference } => circumference > 0.0 && circumference.is_finite(),
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(alloc::format!("path {self:?}")))
        }
    }
}

/// `samples` poses at `k / fps`.
pub fn gen_trajectory(path: &PathSpec, samples: usize) -> Result<Trajectory> {
    path.validate()?;
    Trajectory::from_samples((0..samples).map(|k| {
        let t = k as f64 / path.fps;
        (t, path.pose_at(t))
    }))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub motion: AffineMotion,
    /// Pixels, ≥ 0.
    pub disparity: f64,
    pub seed: u64,
    /// Per-frame intensity gains; empty means all 1.
    pub flicker: Vec<f64>,
    pub trajectory: PathSpec,
    /// Anchoring convention of the emitted flows.
    pub flow_direction: FlowDirection,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            width: 128,
            height: 96,
            frames: 20,
            motion: AffineMotion::default(),
            disparity: 4.0,
            seed: 7,
            flicker: Vec::new(),
            trajectory: PathSpec::default(),
            flow_direction: FlowDirection::Source,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.width < 2 || self.height < 2 {
            return bad("image must be at least 2x2");
        }
        if self.frames < 3 {
            return bad("at least 3 frames are required");
        }
        if !(self.disparity >= 0.0 && self.disparity.is_finite()) {
            return bad("disparity must be finite and non-negative");
        }
        if !(self.motion.scale > 0.0 && self.motion.scale.is_finite())
            || !self.motion.rotation.is_finite()
            || !self.motion.translation.iter().all(|v| v.is_finite())
        {
            return bad("motion parameters must be finite with positive scale");
        }
        if !self.flicker.is_empty() && self.flicker.len() != self.frames {
            return bad("flicker needs one gain per frame");
        }
        if self.flicker.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return bad("flicker gains must be positive");
        }
        self.trajectory.validate()
    }

    pub fn gain(&self, t: usize) -> f64 {
        self.flicker.get(t).copied().unwrap_or(1.0)
    }
}

/// Sum of fixed-frequency sinusoids with seeded phases, valued in [0.05, 0.95].
#[derive(Clone, Debug, PartialEq)]
pub struct Texture {
    waves: Vec<([f64; 2], f64)>,
}

/// Cycles per pixel.
const WAVE_FREQUENCIES: [[f64; 2]; 6] = [
    [1.0 / 23.0, 1.0 / 37.0],
    [-1.0 / 29.0, 1.0 / 19.0],
    [1.0 / 17.0, -1.0 / 41.0],
    [1.0 / 31.0, 1.0 / 13.0],
    [-1.0 / 14.0, -1.0 / 27.0],
    [1.0 / 45.0, 1.0 / 16.0],
];
const WAVE_AMPLITUDE: f64 = 0.075;

impl Texture {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let waves = WAVE_FREQUENCIES
            .iter()
            .map(|&f| (f, 2.0 * PI * unit_f64(&mut rng)))
            .collect();
        Self { waves }
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        0.5 + self
            .waves
            .iter()
            .map(|(f, phase)| WAVE_AMPLITUDE * libm::sin(2.0 * PI * (f[0] * p[0] + f[1] * p[1]) + phase))
            .sum::<f64>()
    }
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - unit_f64(rng);
    let u2 = unit_f64(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
}

/// Validated scene that renders frames and flows on demand.
#[derive(Clone, Debug)]
pub struct SynthScene {
    spec: SynthSpec,
    texture: Texture,
    motion: Affine2,
    motion_inv: Affine2,
    flows: FrameFlows,
}

impl SynthScene {
    pub fn new(spec: SynthSpec) -> Result<Self> {
        spec.validate()?;
        let motion = spec.motion.to_affine(spec.width, spec.height);
        let motion_inv = motion
            .inverse()
            .ok_or_else(|| Error::InvalidParameter("motion is not invertible".into()))?;
        let d = spec.disparity;
        let (to_right, to_left) = (Affine2::translation(d, 0.0), Affine2::translation(-d, 0.0));
        let (step, stereo) = match spec.flow_direction {
            FlowDirection::Source => (motion, to_left),
            FlowDirection::Target => (motion_inv, to_right),
        };
        let right_step = to_right.after(&step).after(&to_left);
        let (w, h) = (spec.width, spec.height);
        let mut flows = FrameFlows::default();
        for (slot, map) in [
            (&mut flows.tmp_left, step),
            (&mut flows.skip_left, step.pow(2)),
            (&mut flows.stereo, stereo),
            (&mut flows.tmp_right, right_step),
        ] {
            let field = map.flow_field(w, h)?;
            if field.valid_count() == 0 {
                return Err(Error::MotionOutOfFrame);
            }
            *slot = Some(field);
        }
        Ok(Self {
            texture: Texture::new(spec.seed),
            spec,
            motion,
            motion_inv,
            flows,
        })
    }

    pub fn spec(&self) -> &SynthSpec {
        &self.spec
    }

    /// The per-frame motion `M`.
    pub fn motion(&self) -> &Affine2 {
        &self.motion
    }

    pub fn timestamp(&self, t: usize) -> f64 {
        t as f64 / self.spec.trajectory.fps
    }

    /// Renders the stereo pair of frame `t`.
    pub fn frame(&self, t: usize) -> Result<StereoFrame> {
        let back = self.motion_inv.pow(t);
        let gain = self.spec.gain(t);
        let d = self.spec.disparity;
        let render = |shift: f64| {
            Image::from_fn(self.spec.width, self.spec.height, 1, |x, y, _| {
                let p = back.apply([x as f64 - shift, y as f64]);
                (gain * self.texture.eval(p)).clamp(0.0, 1.0)
            })
        };
        StereoFrame::new(self.timestamp(t), render(0.0)?, render(d)?)
    }

    /// Flows stored with frame `t`; temporal flows are absent where they
    /// would reach past the last frame.
    pub fn flows(&self, t: usize) -> FrameFlows {
        let n = self.spec.frames;
        let mut out = self.flows.clone();
        if t + 1 >= n {
            out.tmp_left = None;
            out.tmp_right = None;
        }
        if t + 2 >= n {
            out.skip_left = None;
        }
        out
    }

    pub fn trajectory(&self) -> Result<Trajectory> {
        gen_trajectory(&self.spec.trajectory, self.spec.frames)
    }
}

#[derive(Clone, Debug)]
pub struct SynthSequence {
    pub frames: Vec<StereoFrame>,
    pub flows: Vec<FrameFlows>,
    pub trajectory: Trajectory,
}

/// Renders the full sequence described by `spec`.
pub fn gen_sequence(spec: &SynthSpec) -> Result<SynthSequence> {
    let scene = SynthScene::new(spec.clone())?;
    let frames = (0..spec.frames).map(|t| scene.frame(t)).collect::<Result<Vec<_>>>()?;
    let flows = (0..spec.frames).map(|t| scene.flows(t)).collect();
    Ok(SynthSequence {
        frames,
        flows,
        trajectory: scene.trajectory()?,
    })
}

/// Systematic drift and seeded noise applied to relative motions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct Drift {
    /// Extra translation per meter travelled (0.01 scales each step by 1.01).
    pub scale_per_meter: f64,
    /// Extra yaw (about +y) in radians per meter travelled.
    pub rotation_per_meter: f64,
    /// Std. dev. of per-step translation noise, meters per axis.
    pub translation_noise: f64,
    /// Std. dev. of per-step rotation noise, radians per axis.
    pub rotation_noise: f64,
    pub seed: u64,
}

/// Re-chains the trajectory from its first pose with each step
/// `Δ = (R, δ)` replaced by `(R · Ry(r‖δ‖) · noise, (1 + s) δ + noise)`.
pub fn perturb_trajectory(traj: &Trajectory, drift: &Drift) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(drift.seed);
    let poses = traj.poses();
    let mut out = Vec::with_capacity(poses.len());
    let mut current = poses[0];
    out.push(current);
    for w in poses.windows(2) {
        let step = relative(&w[0], &w[1]);
        let dist = norm(step.translation);
        let mut rotation = step
            .rotation
            .mul(&UnitQuaternion::from_axis_angle([0.0, 1.0, 0.0], drift.rotation_per_meter * dist));
        let mut translation = step.translation.map(|c| c * (1.0 + drift.scale_per_meter));
        if drift.translation_noise > 0.0 {
            for c in &mut translation {
                *c += drift.translation_noise * standard_normal(&mut rng);
            }
        }
        if drift.rotation_noise > 0.0 {
            let v: [f64; 3] = core::array::from_fn(|_| drift.rotation_noise * standard_normal(&mut rng));
            rotation = rotation.mul(&UnitQuaternion::from_axis_angle(v, norm(v)));
        }
        current = compose(&current, &Pose::new(rotation, translation));
        out.push(current);
    }
    Trajectory::new(traj.timestamps().to_vec(), out).expect("timestamps are unchanged")
}
