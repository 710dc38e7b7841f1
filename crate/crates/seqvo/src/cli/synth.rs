use std::path::Path;

use rayon::prelude::*;
use seqvo_core::consistency::FlowKind;
use seqvo_core::synth::{SynthScene, SynthSpec};

use super::GlobalArgs;
use crate::error::{self, Error, Result};
use crate::imageio::{write_flow, write_png, BitDepth};
use crate::manifest::{FlowPaths, FrameEntry, Manifest, SCHEMA_VERSION};
use crate::traj::format_tum;

fn frame_files(t: usize) -> (String, String) {
    (format!("left/{t:06}.png"), format!("right/{t:06}.png"))
}

fn flow_file(kind: FlowKind, t: usize) -> String {
    format!("flows/{kind}_{t:06}.flo")
}

/// Renders every frame and flow of `spec` into `out` with a manifest.
pub fn write_sequence(spec: SynthSpec, out: &Path) -> Result<()> {
    let scene = SynthScene::new(spec).map_err(Error::data)?;
    let n = scene.spec().frames;
    let written: Vec<Result<FrameEntry>> = (0..n)
        .into_par_iter()
        .map(|t| {
            let frame = scene.frame(t).map_err(Error::data)?;
            let (left, right) = frame_files(t);
            write_png(&out.join(&left), frame.left(), BitDepth::Sixteen)?;
            write_png(&out.join(&right), frame.right(), BitDepth::Sixteen)?;
            let flows = scene.flows(t);
            let mut paths = FlowPaths::default();
            for kind in FlowKind::ALL {
                if let Some(f) = flows.get(kind) {
                    let rel = flow_file(kind, t);
                    write_flow(&out.join(&rel), f)?;
                    paths.set(kind, rel);
                }
            }
            Ok(FrameEntry {
                index: t,
                timestamp: frame.timestamp,
                left,
                right,
                flows: paths,
            })
        })
        .collect();
    let frames = written.into_iter().collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        schema: SCHEMA_VERSION,
        crop_rows: 0,
        flow_direction: scene.spec().flow_direction,
        frames,
    };
    let traj = scene.trajectory().map_err(Error::data)?;
    error::write(&out.join("trajectory.tum"), format_tum(&traj, &[]).as_bytes())?;
    error::write(&out.join("manifest.json"), manifest.to_json().as_bytes())
}

pub(super) fn run(global: &GlobalArgs, spec_path: Option<&Path>, out: &Path) -> Result<()> {
    let mut spec = match spec_path {
        Some(p) => serde_json::from_str::<SynthSpec>(&error::read_text(p)?)
            .map_err(|e| Error::invalid(format!("{}: malformed spec: {e}", p.display())))?,
        None => SynthSpec::default(),
    };
    if let Some(d) = global.flow_direction {
        spec.flow_direction = d.into();
    }
    write_sequence(spec, out)
}
