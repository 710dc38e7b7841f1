//! Trajectory text formats: TUM, KITTI and GPS/INS CSV.

use std::path::Path;

use seqvo_core::se3::euler_rpy_to_pose;
use seqvo_core::{Pose, Trajectory, UnitQuaternion};

use crate::error::{self, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum TrajFormat {
    /// `timestamp tx ty tz qx qy qz qw`
    Tum,
    /// 12 floats per line: row-major 3×4 matrix, implicit frame index.
    Kitti,
}

impl TrajFormat {
    /// Guesses from the field count of the first data line.
    pub fn detect(text: &str) -> Result<Self, String> {
        let line = data_lines(text).next().ok_or("no data lines")?.1;
        match line.split_whitespace().count() {
            8 => Ok(TrajFormat::Tum),
            12 => Ok(TrajFormat::Kitti),
            n => Err(format!("cannot infer trajectory format from {n} fields")),
        }
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_fields<const N: usize>(line_no: usize, line: &str) -> Result<[f64; N], String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != N {
        return Err(format!("line {line_no}: expected {N} fields, found {}", fields.len()));
    }
    let mut out = [0.0; N];
    for (slot, field) in out.iter_mut().zip(fields) {
        *slot = field
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("line {line_no}: invalid number {field:?}"))?;
    }
    Ok(out)
}

pub fn parse_tum(text: &str) -> Result<Trajectory, String> {
    let mut samples = Vec::new();
    for (n, line) in data_lines(text) {
        let [t, tx, ty, tz, qx, qy, qz, qw] = parse_fields::<8>(n, line)?;
        let q = UnitQuaternion::new(qw, qx, qy, qz).map_err(|e| format!("line {n}: {e}"))?;
        samples.push((t, Pose::new(q, [tx, ty, tz])));
    }
    Trajectory::from_samples(samples).map_err(|e| e.to_string())
}

/// One line per pose in shortest round-trip float notation, preceded by
/// `# `-prefixed `header` lines.
pub fn format_tum(traj: &Trajectory, header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        out.push_str(&format!("# {h}\n"));
    }
    for (t, p) in traj.timestamps().iter().zip(traj.poses()) {
        let [tx, ty, tz] = p.translation;
        let q = &p.rotation;
        out.push_str(&format!("{t} {tx} {ty} {tz} {} {} {} {}\n", q.x(), q.y(), q.z(), q.w()));
    }
    out
}

/// Timestamps are the zero-based line indices.
pub fn parse_kitti(text: &str) -> Result<Trajectory, String> {
    let mut samples = Vec::new();
    for (k, (n, line)) in data_lines(text).enumerate() {
        let f = parse_fields::<12>(n, line)?;
        let m = [[f[0], f[1], f[2], f[3]], [f[4], f[5], f[6], f[7]], [f[8], f[9], f[10], f[11]]];
        let pose = Pose::from_matrix_3x4(&m).map_err(|e| format!("line {n}: {e}"))?;
        samples.push((k as f64, pose));
    }
    Trajectory::from_samples(samples).map_err(|e| e.to_string())
}

pub fn format_kitti(traj: &Trajectory) -> String {
    let mut out = String::new();
    for p in traj.poses() {
        let fields: Vec<String> = p.to_matrix_3x4().iter().flatten().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_trajectory(text: &str, format: Option<TrajFormat>) -> Result<Trajectory, String> {
    match format.map_or_else(|| TrajFormat::detect(text), Ok)? {
        TrajFormat::Tum => parse_tum(text),
        TrajFormat::Kitti => parse_kitti(text),
    }
}

pub fn read_trajectory(path: &Path, format: Option<TrajFormat>) -> Result<Trajectory> {
    let text = error::read_text(path)?;
    parse_trajectory(&text, format).map_err(|m| Error::format(path, m))
}

pub const GPSINS_HEADER: [&str; 7] = ["timestamp", "northing", "easting", "down", "roll", "pitch", "yaw"];

/// Microsecond timestamp to seconds.
pub fn micros_to_seconds(us: i64) -> f64 {
    us as f64 / 1e6
}

/// GPS/INS CSV: microsecond timestamps, translation (northing, easting, down)
/// and roll/pitch/yaw in radians.
pub fn parse_gpsins(text: &str) -> Result<Trajectory, String> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(GPSINS_HEADER) {
        return Err(format!("expected header {}", GPSINS_HEADER.join(",")));
    }
    let mut samples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let bad = |field: &str| format!("row {}: invalid {field}", row + 1);
        let us: i64 = record[0].parse().map_err(|_| bad("timestamp"))?;
        let mut v = [0.0; 6];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = record[k + 1]
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(GPSINS_HEADER[k + 1]))?;
        }
        samples.push((micros_to_seconds(us), euler_rpy_to_pose(v[3], v[4], v[5], [v[0], v[1], v[2]])));
    }
    Trajectory::from_samples(samples).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum TimeUnit {
    /// Integer microseconds.
    #[default]
    Us,
    /// Decimal seconds.
    S,
}

/// One timestamp per line; `#` starts a comment line.
pub fn parse_timestamps(text: &str, unit: TimeUnit) -> Result<Vec<f64>, String> {
    data_lines(text)
        .map(|(n, line)| match unit {
            TimeUnit::Us => line
                .parse::<i64>()
                .map(micros_to_seconds)
                .map_err(|_| format!("line {n}: invalid microsecond timestamp {line:?}")),
            TimeUnit::S => line
                .parse::<f64>()
                .ok()
                .filter(|t| t.is_finite())
                .ok_or_else(|| format!("line {n}: invalid timestamp {line:?}")),
        })
        .collect()
}
