//! Numerics for evaluating temporally and stereo-consistent image sequences.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure computations:
//!
//! - [`image`] and [`flow`]: dense images and optical-flow fields, bilinear
//!   sampling, backward warping, flow composition and endpoint error.
//! - [`flo`]: the Middlebury `.flo` byte layout.
//! - [`consistency`]: SSIM, the SSIM+L1 image consistency measure, the
//!   cycle/temporal/stereo/adversarial loss terms and the flow-based
//!   temporal and stereo consistency metrics.
//! - [`se3`]: rigid poses, trajectories and pose interpolation.
//! - [`voeval`]: relative (length-binned) and absolute trajectory errors.
//! - [`synth`]: a synthetic stereo sequence generator with analytic flows
//!   and trajectories, used as an oracle for everything above.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod consistency;
pub mod error;
pub mod flo;
pub mod flow;
pub mod image;
mod sample;
pub mod se3;
pub mod stats;
pub mod synth;
pub mod voeval;

pub use error::{Error, Result};
pub use flow::{compose_flows, epe, warp_backward, EpeMap, EpeStats, FlowField};
pub use image::{Image, StereoFrame};
pub use se3::{Pose, Trajectory, UnitQuaternion};
