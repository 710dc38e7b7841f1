use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::stats;

use super::metrics::{frame_record, FlowDirection, FrameFlows, FrameRecord, MetricSelection};

/// Aggregate of one metric across frames.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricAggregate {
    pub frames: usize,
    /// Mean of the per-frame means.
    pub mean: f64,
    /// Median of the per-frame means.
    pub median: f64,
    /// Mean over every valid pixel of every frame.
    pub pooled_mean: f64,
    pub valid_px: usize,
}

impl MetricAggregate {
    fn from_stats(items: &[crate::flow::EpeStats]) -> Option<Self> {
        let means: Vec<f64> = items.iter().map(|s| s.mean).collect();
        let valid_px: usize = items.iter().map(|s| s.valid).sum();
        Some(Self {
            frames: items.len(),
            mean: stats::mean(&means)?,
            median: stats::median(&means)?,
            pooled_mean: stats::sum(items.iter().map(|s| s.sum)) / valid_px as f64,
            valid_px,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConsistencyReport {
    /// Ordered by frame index.
    pub records: Vec<FrameRecord>,
    pub e_tmp: Option<MetricAggregate>,
    pub e_st: Option<MetricAggregate>,
}

impl ConsistencyReport {
    /// Sorts records by frame and recomputes the aggregates.
    pub fn from_records(mut records: Vec<FrameRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Empty("consistency report"));
        }
        records.sort_by_key(|r| r.frame);
        let tmp: Vec<_> = records.iter().filter_map(|r| r.e_tmp).collect();
        let st: Vec<_> = records.iter().filter_map(|r| r.e_st).collect();
        Ok(Self {
            e_tmp: MetricAggregate::from_stats(&tmp),
            e_st: MetricAggregate::from_stats(&st),
            records,
        })
    }
}

/// Evaluates every frame of an in-memory sequence.
pub fn sequence_report(
    frames: &[FrameFlows],
    selection: MetricSelection,
    direction: FlowDirection,
) -> Result<ConsistencyReport> {
    let count = selection.record_count(frames.len())?;
    let records = (0..count)
        .map(|t| frame_record(t, frames.len(), &frames[t], frames.get(t + 1), selection, direction))
        .collect::<Result<Vec<_>>>()?;
    ConsistencyReport::from_records(records)
}
