//! Middlebury `.flo` codec.
//!
//! Layout (little endian): `f32` magic `202021.25`, `i32` width, `i32` height,
//! then `width * height` interleaved `(u, v)` `f32` pairs in row-major order.
//! Cells whose magnitude exceeds [`UNKNOWN_FLOW_THRESHOLD`] are unknown.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flow::FlowField;

pub const MAGIC: f32 = 202021.25;
pub const UNKNOWN_FLOW_THRESHOLD: f32 = 1e9;
/// Value written for masked cells.
pub const UNKNOWN_FLOW: f32 = 1e10;

const HEADER_LEN: usize = 12;

fn is_unknown(u: f32, v: f32) -> bool {
    !(u.is_finite() && v.is_finite())
        || u.abs() > UNKNOWN_FLOW_THRESHOLD
        || v.abs() > UNKNOWN_FLOW_THRESHOLD
}

fn read_f32(bytes: &[u8], at: usize) -> f32 {
    f32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

fn read_i32(bytes: &[u8], at: usize) -> i32 {
    i32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

/// Decodes a `.flo` byte stream.
///
/// Unknown cells become masked but keep their raw values, so
/// `write_flo(read_flo(b))` reproduces `b` exactly.
pub fn read_flo(bytes: &[u8]) -> Result<FlowField> {
    if bytes.len() < 4 {
        return Err(Error::TruncatedFlowFile);
    }
    if read_f32(bytes, 0).to_bits() != MAGIC.to_bits() {
        return Err(Error::NotAFlowFile);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFlowFile);
    }
    let (w, h) = (read_i32(bytes, 4), read_i32(bytes, 8));
    if w <= 0 || h <= 0 {
        return Err(Error::InvalidDimensions {
            width: w.max(0) as usize,
            height: h.max(0) as usize,
        });
    }
    let (width, height) = (w as usize, h as usize);
    let n = width
        .checked_mul(height)
        .ok_or(Error::InvalidDimensions { width, height })?;
    let payload = n.checked_mul(8).ok_or(Error::InvalidDimensions { width, height })?;
    let body = &bytes[HEADER_LEN..];
    if body.len() < payload {
        return Err(Error::TruncatedFlowFile);
    }
    if body.len() > payload {
        return Err(Error::TrailingData);
    }
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    for cell in body.chunks_exact(8) {
        let (cu, cv) = (read_f32(cell, 0), read_f32(cell, 4));
        u.push(cu as f64);
        v.push(cv as f64);
        mask.push(!is_unknown(cu, cv));
    }
    FlowField::with_mask(width, height, u, v, mask)
}

/// Encodes a field as `.flo`; components are narrowed to `f32`.
///
/// Masked cells are written as [`UNKNOWN_FLOW`] unless they already hold an
/// unknown marker, which is preserved.
pub fn write_flo(flow: &FlowField) -> Vec<u8> {
    let (u, v, mask) = flow.raw_parts();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * u.len());
    out.extend_from_slice(&MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for i in 0..u.len() {
        let (mut cu, mut cv) = (u[i] as f32, v[i] as f32);
        if !mask[i] && !is_unknown(cu, cv) {
            cu = UNKNOWN_FLOW;
            cv = UNKNOWN_FLOW;
        }
        out.extend_from_slice(&cu.to_le_bytes());
        out.extend_from_slice(&cv.to_le_bytes());
    }
    out
}
