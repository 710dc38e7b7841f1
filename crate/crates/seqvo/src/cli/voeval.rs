use std::path::PathBuf;

use rayon::prelude::*;
use seqvo_core::voeval::{evaluate, EvalConfig, RotationUnit, VoMetrics};
use seqvo_core::Trajectory;

use super::{emit, GlobalArgs, PlaneArg};
use crate::error::{self, Error, Result};
use crate::report::{vo_csv, vo_json, xy_text, OutputFormat, Provenance, VoRow};
use crate::traj::{parse_trajectory, TrajFormat};

pub(super) struct VoArgs {
    pub gt: PathBuf,
    pub estimates: Vec<PathBuf>,
    pub lengths: Vec<f64>,
    pub stride: usize,
    pub align: bool,
    pub max_dt: f64,
    pub r_unit: RotationUnit,
    pub traj_format: Option<TrajFormat>,
    pub out: Option<PathBuf>,
    pub plane: PlaneArg,
}

fn load(path: &PathBuf, format: Option<TrajFormat>, provenance: Option<&mut Provenance>) -> Result<Trajectory> {
    let bytes = error::read(path)?;
    if let Some(p) = provenance {
        p.input_bytes(path, &bytes);
    }
    let text = String::from_utf8(bytes).map_err(|_| Error::format(path, "not UTF-8 text"))?;
    parse_trajectory(&text, format).map_err(|m| Error::format(path, m))
}

fn top_down(traj: &Trajectory, plane: PlaneArg) -> String {
    xy_text(traj.poses().iter().map(|p| {
        let [x, y, z] = p.translation;
        match plane {
            PlaneArg::Xz => (x, z),
            PlaneArg::Xy => (x, y),
        }
    }))
}

pub(super) fn run(global: &GlobalArgs, args: &VoArgs) -> Result<()> {
    if args.lengths.is_empty() || args.lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::invalid("--lengths must be positive finite meters"));
    }
    if args.stride == 0 {
        return Err(Error::invalid("--stride must be positive"));
    }
    if !(args.max_dt >= 0.0 && args.max_dt.is_finite()) {
        return Err(Error::invalid("--max-dt must be finite and non-negative"));
    }
    let config = EvalConfig {
        lengths: args.lengths.clone(),
        stride: args.stride,
        max_dt: args.max_dt,
        align: args.align,
        rotation_unit: args.r_unit,
    };

    let mut provenance = Provenance::new("voeval");
    let gt = load(&args.gt, args.traj_format, Some(&mut provenance))?;
    let evaluated: Vec<Result<(Vec<u8>, Trajectory, VoMetrics)>> = args
        .estimates
        .par_iter()
        .map(|path| {
            let bytes = error::read(path)?;
            let text = std::str::from_utf8(&bytes).map_err(|_| Error::format(path, "not UTF-8 text"))?;
            let est = parse_trajectory(text, args.traj_format).map_err(|m| Error::format(path, m))?;
            let metrics = evaluate(&gt, &est, &config).map_err(|e| Error::format(path, e))?;
            Ok((bytes, est, metrics))
        })
        .collect();
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for (path, item) in args.estimates.iter().zip(evaluated) {
        let (bytes, est, metrics) = item?;
        provenance.input_bytes(path, &bytes);
        rows.push(VoRow::new(path.display().to_string(), &metrics));
        results.push((est, metrics));
    }
    let median = VoRow::median(&rows).expect("at least one estimate");
    let lengths: Vec<String> = args.lengths.iter().map(f64::to_string).collect();
    provenance
        .flag("lengths", lengths.join(","))
        .flag("stride", args.stride)
        .flag("align", args.align)
        .flag("max_dt", args.max_dt)
        .flag(
            "r_unit",
            match args.r_unit {
                RotationUnit::DegPer100m => "deg-per-100m",
                RotationUnit::Deg => "deg",
            },
        )
        .flag("traj_format", args.traj_format.map_or("auto".into(), |f| format!("{f:?}").to_lowercase()));

    let format = global.format.unwrap_or_default();
    let table = match format {
        OutputFormat::Csv => vo_csv(&rows, &median, &provenance),
        OutputFormat::Json => vo_json(&rows, &median, &provenance),
    };
    if let Some(dir) = &args.out {
        let ext = match format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        };
        emit(&table, Some(&dir.join(format!("metrics.{ext}"))))?;
        emit(&top_down(&gt, args.plane), Some(&dir.join("gt_path.txt")))?;
        for (k, (est, m)) in results.iter().enumerate() {
            emit(&top_down(est, args.plane), Some(&dir.join(format!("est{k}_path.txt"))))?;
            emit(&xy_text(m.bins.iter().map(|b| (b.length, b.t_rel))), Some(&dir.join(format!("est{k}_t_rel.txt"))))?;
            emit(&xy_text(m.bins.iter().map(|b| (b.length, b.r_rel))), Some(&dir.join(format!("est{k}_r_rel.txt"))))?;
        }
    }
    emit(&table, None)
}
