use std::path::Path;

use seqvo_core::se3::interpolate;
use seqvo_core::{Error as CoreError, Trajectory};

use super::emit;
use crate::error::{self, Error, Result};
use crate::report::Provenance;
use crate::traj::{format_tum, parse_gpsins, parse_timestamps, TimeUnit};

pub(super) fn run(gpsins: &Path, timestamps: &Path, unit: TimeUnit, out: Option<&Path>) -> Result<()> {
    let mut provenance = Provenance::new("interp");
    let ins_bytes = error::read(gpsins)?;
    provenance.input_bytes(gpsins, &ins_bytes);
    let stamp_bytes = error::read(timestamps)?;
    provenance.input_bytes(timestamps, &stamp_bytes);
    provenance.flag("timestamps_unit", format!("{unit:?}").to_lowercase());

    let text = |path: &Path, b: Vec<u8>| String::from_utf8(b).map_err(|_| Error::format(path, "not UTF-8 text"));
    let ins = parse_gpsins(&text(gpsins, ins_bytes)?).map_err(|m| Error::format(gpsins, m))?;
    let stamps = parse_timestamps(&text(timestamps, stamp_bytes)?, unit).map_err(|m| Error::format(timestamps, m))?;

    let mut kept = Vec::with_capacity(stamps.len());
    let mut dropped = 0usize;
    for t in stamps {
        match interpolate(&ins, t) {
            Ok(p) => kept.push((t, p)),
            Err(CoreError::Extrapolation { .. }) => dropped += 1,
            Err(e) => return Err(Error::data(e)),
        }
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} timestamps outside the GPS/INS time range");
    }
    if kept.is_empty() {
        return Err(Error::invalid("no requested timestamp lies inside the GPS/INS time range"));
    }
    let traj = Trajectory::from_samples(kept)
        .map_err(|e| Error::invalid(format!("{}: {e}", timestamps.display())))?;
    emit(&format_tum(&traj, &provenance.comment_lines()), out)
}
