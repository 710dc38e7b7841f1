use std::path::Path;

use rayon::prelude::*;
use seqvo_core::consistency::{frame_record, ConsistencyReport, FlowKind, FrameRecord, MetricSelection};

use super::{emit, GlobalArgs};
use crate::error::{Error, Result};
use crate::manifest::SequenceManifest;
use crate::report::{consistency_csv, consistency_json, OutputFormat, Provenance};

pub(super) fn run(global: &GlobalArgs, manifest: &Path, out: &Path, selection: MetricSelection) -> Result<()> {
    let seq = SequenceManifest::load(manifest)?;
    let direction = global.flow_direction.map_or(seq.manifest.flow_direction, Into::into);
    let n = seq.len();
    let count = selection.record_count(n).map_err(|e| Error::invalid(format!("{}: {e}", manifest.display())))?;

    let plan: Vec<(Vec<FlowKind>, Vec<FlowKind>)> = (0..count).map(|t| selection.required_flows(t, n)).collect();
    for (t, (cur, next)) in plan.iter().enumerate() {
        seq.require_flows(t, cur)?;
        seq.require_flows(t + 1, next)?;
    }
    seq.check_files()?;

    let records: Vec<Result<FrameRecord>> = plan
        .par_iter()
        .enumerate()
        .map(|(t, (cur, next))| {
            let current = seq.load_flows(t, cur)?;
            let following = if next.is_empty() { None } else { Some(seq.load_flows(t + 1, next)?) };
            frame_record(t, n, &current, following.as_ref(), selection, direction)
                .map_err(|e| Error::data(format!("frame {t}: {e}")))
        })
        .collect();
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    let report = ConsistencyReport::from_records(records).map_err(Error::data)?;

    let mut used: Vec<std::path::PathBuf> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (t, (cur, next)) in plan.iter().enumerate() {
        for (frame, kinds) in [(t, cur), (t + 1, next)] {
            for &k in kinds {
                let p = seq.flow_path(frame, k).expect("checked");
                if seen.insert(p.clone()) {
                    used.push(p);
                }
            }
        }
    }
    let mut provenance = Provenance::new("consistency");
    provenance.input(manifest)?;
    let digests: Vec<Result<Vec<u8>>> = used.par_iter().map(|p| crate::error::read(p)).collect();
    for (p, bytes) in used.iter().zip(digests) {
        provenance.input_bytes(p, &bytes?);
    }
    provenance
        .flag("metrics", format!("{selection:?}").to_lowercase())
        .flag("flow_direction", direction.as_str())
        .flag("crop_rows", seq.manifest.crop_rows);

    let csv = consistency_csv(&report, &provenance);
    let json = consistency_json(&report, &provenance);
    emit(&csv, Some(&out.join("consistency.csv")))?;
    emit(&json, Some(&out.join("consistency.json")))?;
    match global.format.unwrap_or_default() {
        OutputFormat::Csv => emit(&csv, None),
        OutputFormat::Json => emit(&json, None),
    }
}
