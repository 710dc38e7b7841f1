//! CSV/JSON report writers with a provenance header.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use seqvo_core::consistency::{ConsistencyReport, MetricAggregate};
use seqvo_core::voeval::{RotationUnit, VoMetrics};

use crate::error::{self, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Tool version, input digests and effective flags of one invocation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub flags: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Provenance {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            inputs: Vec::new(),
            flags: BTreeMap::new(),
        }
    }

    pub fn input_bytes(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = error::read(path)?;
        self.input_bytes(path, &bytes);
        Ok(())
    }

    pub fn flag(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.flags.insert(name.into(), value.to_string());
        self
    }

    /// `# `-prefixed lines, without trailing newline on the last.
    pub fn comment_lines(&self) -> Vec<String> {
        let mut out = vec![format!("{} {} {}", self.tool, self.version, self.command)];
        out.extend(self.inputs.iter().map(|i| format!("input {} sha256={}", i.path, i.sha256)));
        out.extend(self.flags.iter().map(|(k, v)| format!("flag {k}={v}")));
        out
    }

    fn csv_preamble(&self) -> String {
        self.comment_lines().iter().map(|l| format!("# {l}\n")).collect()
    }
}

fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_table(provenance: &Provenance, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
    provenance.csv_preamble() + &body
}

fn json_document(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub const CONSISTENCY_HEADER: [&str; 6] = ["frame", "e_tmp_mean", "e_tmp_median", "e_st_mean", "e_st_median", "valid_px"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub frame: usize,
    pub e_tmp_mean: Option<f64>,
    pub e_tmp_median: Option<f64>,
    pub e_st_mean: Option<f64>,
    pub e_st_median: Option<f64>,
    /// Valid pixels of the temporal comparison when present, else of the stereo one.
    pub valid_px: usize,
}

pub fn consistency_rows(report: &ConsistencyReport) -> Vec<ConsistencyRow> {
    report
        .records
        .iter()
        .map(|r| ConsistencyRow {
            frame: r.frame,
            e_tmp_mean: r.e_tmp.map(|s| s.mean),
            e_tmp_median: r.e_tmp.map(|s| s.median),
            e_st_mean: r.e_st.map(|s| s.mean),
            e_st_median: r.e_st.map(|s| s.median),
            valid_px: r.e_tmp.or(r.e_st).map_or(0, |s| s.valid),
        })
        .collect()
}

pub fn consistency_csv(report: &ConsistencyReport, provenance: &Provenance) -> String {
    let rows: Vec<Vec<String>> = consistency_rows(report)
        .into_iter()
        .map(|r| {
            vec![
                r.frame.to_string(),
                num(r.e_tmp_mean),
                num(r.e_tmp_median),
                num(r.e_st_mean),
                num(r.e_st_median),
                r.valid_px.to_string(),
            ]
        })
        .collect();
    csv_table(provenance, &CONSISTENCY_HEADER, &rows)
}

#[derive(Serialize)]
struct Aggregates {
    e_tmp: Option<MetricAggregate>,
    e_st: Option<MetricAggregate>,
}

#[derive(Serialize)]
struct ConsistencyDocument<'a> {
    metadata: &'a Provenance,
    frames: Vec<ConsistencyRow>,
    aggregates: Aggregates,
}

pub fn consistency_json(report: &ConsistencyReport, provenance: &Provenance) -> String {
    json_document(&ConsistencyDocument {
        metadata: provenance,
        frames: consistency_rows(report),
        aggregates: Aggregates {
            e_tmp: report.e_tmp,
            e_st: report.e_st,
        },
    })
}

pub const VO_HEADER: [&str; 11] = [
    "estimate", "t_rel", "r_rel", "r_rel_unit", "t_rel_raw", "r_rel_raw", "t_abs", "r_abs", "pairs", "bins_used", "matched",
];

/// One row of the trajectory metrics table. Counts are floats so the median
/// row shares the layout.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VoRow {
    pub estimate: String,
    pub t_rel: f64,
    pub r_rel: f64,
    pub r_rel_unit: RotationUnit,
    pub t_rel_raw: f64,
    pub r_rel_raw: f64,
    pub t_abs: f64,
    pub r_abs: f64,
    pub pairs: f64,
    pub bins_used: f64,
    pub matched: f64,
}

impl VoRow {
    pub fn new(estimate: String, m: &VoMetrics) -> Self {
        Self {
            estimate,
            t_rel: m.t_rel,
            r_rel: m.r_rel,
            r_rel_unit: m.r_rel_unit,
            t_rel_raw: m.t_rel_raw,
            r_rel_raw: m.r_rel_raw,
            t_abs: m.t_abs,
            r_abs: m.r_abs,
            pairs: m.pairs as f64,
            bins_used: m.bins_used as f64,
            matched: m.matched as f64,
        }
    }

    /// Column-wise median of the final scalars.
    pub fn median(rows: &[VoRow]) -> Option<VoRow> {
        let first = rows.first()?;
        let med = |f: fn(&VoRow) -> f64| {
            let v: Vec<f64> = rows.iter().map(f).collect();
            seqvo_core::stats::median(&v).expect("non-empty")
        };
        Some(VoRow {
            estimate: "median".into(),
            t_rel: med(|r| r.t_rel),
            r_rel: med(|r| r.r_rel),
            r_rel_unit: first.r_rel_unit,
            t_rel_raw: med(|r| r.t_rel_raw),
            r_rel_raw: med(|r| r.r_rel_raw),
            t_abs: med(|r| r.t_abs),
            r_abs: med(|r| r.r_abs),
            pairs: med(|r| r.pairs),
            bins_used: med(|r| r.bins_used),
            matched: med(|r| r.matched),
        })
    }

    fn fields(&self) -> Vec<String> {
        let unit = match self.r_rel_unit {
            RotationUnit::DegPer100m => "deg_per_100m",
            RotationUnit::Deg => "deg",
        };
        let mut out = vec![self.estimate.clone()];
        out.extend([self.t_rel, self.r_rel].map(|v| v.to_string()));
        out.push(unit.into());
        out.extend(
            [self.t_rel_raw, self.r_rel_raw, self.t_abs, self.r_abs, self.pairs, self.bins_used, self.matched]
                .map(|v| v.to_string()),
        );
        out
    }
}

pub fn vo_csv(rows: &[VoRow], median: &VoRow, provenance: &Provenance) -> String {
    let mut table: Vec<Vec<String>> = rows.iter().map(VoRow::fields).collect();
    table.push(median.fields());
    csv_table(provenance, &VO_HEADER, &table)
}

#[derive(Serialize)]
struct VoDocument<'a> {
    metadata: &'a Provenance,
    rows: &'a [VoRow],
    median: &'a VoRow,
}

pub fn vo_json(rows: &[VoRow], median: &VoRow, provenance: &Provenance) -> String {
    json_document(&VoDocument {
        metadata: provenance,
        rows,
        median,
    })
}

/// Loss components; `None` marks a term without inputs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossReport {
    pub l_adv: Option<f64>,
    pub l_cy: Option<f64>,
    pub l_tmp: Option<f64>,
    pub l_st: Option<f64>,
    pub total: f64,
    pub weights: seqvo_core::consistency::LossWeights,
}

pub const LOSS_HEADER: [&str; 10] = [
    "l_adv", "l_cy", "l_tmp", "l_st", "total", "w_adv", "w_cy", "w_tmp", "w_st", "alpha",
];

pub fn loss_csv(report: &LossReport, provenance: &Provenance) -> String {
    let w = &report.weights;
    let row = vec![
        num(report.l_adv),
        num(report.l_cy),
        num(report.l_tmp),
        num(report.l_st),
        report.total.to_string(),
        w.adv.to_string(),
        w.cy.to_string(),
        w.tmp.to_string(),
        w.st.to_string(),
        w.alpha.to_string(),
    ];
    csv_table(provenance, &LOSS_HEADER, &[row])
}

#[derive(Serialize)]
struct LossDocument<'a> {
    metadata: &'a Provenance,
    #[serde(flatten)]
    report: &'a LossReport,
}

pub fn loss_json(report: &LossReport, provenance: &Provenance) -> String {
    json_document(&LossDocument {
        metadata: provenance,
        report,
    })
}

/// Two whitespace-separated columns, one point per line.
pub fn xy_text(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    points.into_iter().map(|(x, y)| format!("{x} {y}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqvo_core::consistency::FrameRecord;
    use seqvo_core::EpeStats;

    fn stats(mean: f64, valid: usize) -> EpeStats {
        EpeStats {
            mean,
            median: mean,
            valid,
            sum: mean * valid as f64,
        }
    }

    fn provenance() -> Provenance {
        let mut p = Provenance::new("consistency");
        p.input_bytes(Path::new("m.json"), b"abc");
        p.flag("metrics", "both");
        p
    }

    #[test]
    fn sha256_matches_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn consistency_csv_layout() {
        let report = ConsistencyReport::from_records(vec![
            FrameRecord { frame: 0, e_tmp: Some(stats(0.5, 10)), e_st: Some(stats(0.25, 12)) },
            FrameRecord { frame: 1, e_tmp: None, e_st: Some(stats(1.0, 12)) },
        ])
        .unwrap();
        let csv = consistency_csv(&report, &provenance());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], format!("# seqvo {} consistency", env!("CARGO_PKG_VERSION")));
        assert!(lines[1].starts_with("# input m.json sha256=ba7816bf"));
        assert_eq!(lines[2], "# flag metrics=both");
        assert_eq!(lines[3], CONSISTENCY_HEADER.join(","));
        assert_eq!(lines[4], "0,0.5,0.5,0.25,0.25,10");
        assert_eq!(lines[5], "1,,,1,1,12");
    }

    #[test]
    fn consistency_json_has_aggregates() {
        let report = ConsistencyReport::from_records(vec![FrameRecord {
            frame: 0,
            e_tmp: None,
            e_st: Some(stats(2.0, 4)),
        }])
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&consistency_json(&report, &provenance())).unwrap();
        assert_eq!(v["metadata"]["command"], "consistency");
        assert_eq!(v["frames"][0]["e_tmp_mean"], serde_json::Value::Null);
        assert_eq!(v["aggregates"]["e_st"]["pooled_mean"], 2.0);
        assert!(v["aggregates"]["e_tmp"].is_null());
    }

    #[test]
    fn median_row_of_identical_rows() {
        let row = VoRow {
            estimate: "a".into(),
            t_rel: 1.5,
            r_rel: 0.2,
            r_rel_unit: RotationUnit::DegPer100m,
            t_rel_raw: 3.0,
            r_rel_raw: 0.1,
            t_abs: 2.0,
            r_abs: 0.3,
            pairs: 10.0,
            bins_used: 2.0,
            matched: 50.0,
        };
        let m = VoRow::median(&vec![row.clone(); 5]).unwrap();
        assert_eq!(m, VoRow { estimate: "median".into(), ..row });
    }
}
