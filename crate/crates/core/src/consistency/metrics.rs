use core::fmt;

use crate::error::{Error, Result};
use crate::flow::{compose_flows, epe, EpeStats, FlowField};

/// `E_tmp = EPE(W_t^{t+2}, W_t^{t+1} ⊕ W_{t+1}^{t+2})` with flows anchored on
/// the source frame.
pub fn temporal_consistency_epe(
    w_t_t2: &FlowField,
    w_t_t1: &FlowField,
    w_t1_t2: &FlowField,
) -> Result<EpeStats> {
    let chained = compose_flows(w_t_t1, w_t1_t2)?;
    Ok(epe(w_t_t2, &chained)?.stats)
}

/// `E_st = EPE(W_{t,r}^{t+1,r} ⊕ W_{t+1,r}^{t+1,l}, W_{t,r}^{t,l} ⊕ W_{t,l}^{t+1,l})`.
pub fn stereo_consistency_epe(
    w_r_tr: &FlowField,
    w_t1_rl: &FlowField,
    w_t_rl: &FlowField,
    w_l_tl: &FlowField,
) -> Result<EpeStats> {
    let temporal_first = compose_flows(w_r_tr, w_t1_rl)?;
    let stereo_first = compose_flows(w_t_rl, w_l_tl)?;
    Ok(epe(&temporal_first, &stereo_first)?.stats)
}

/// Grid a stored flow is anchored on.
///
/// `Source`: a flow named `a → b` is defined on frame `a` and points to where
/// each pixel lands in `b` (forward flow). `Target`: it is defined on frame
/// `b` and points back into `a`, which is what backward warping `a` into `b`
/// consumes directly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FlowDirection {
    #[default]
    Source,
    Target,
}

impl FlowDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowDirection::Source => "source",
            FlowDirection::Target => "target",
        }
    }
}

/// The per-frame flows a sequence carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FlowKind {
    /// Left camera, frame t → t+1.
    TmpLeft,
    /// Left camera, frame t → t+2.
    SkipLeft,
    /// Frame t, right → left.
    Stereo,
    /// Right camera, frame t → t+1.
    TmpRight,
}

impl FlowKind {
    pub const ALL: [FlowKind; 4] = [
        FlowKind::TmpLeft,
        FlowKind::SkipLeft,
        FlowKind::Stereo,
        FlowKind::TmpRight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FlowKind::TmpLeft => "tmp_left",
            FlowKind::SkipLeft => "skip_left",
            FlowKind::Stereo => "stereo",
            FlowKind::TmpRight => "tmp_right",
        }
    }
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Flows attached to one frame index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameFlows {
    pub tmp_left: Option<FlowField>,
    pub skip_left: Option<FlowField>,
    pub stereo: Option<FlowField>,
    pub tmp_right: Option<FlowField>,
}

impl FrameFlows {
    pub fn get(&self, kind: FlowKind) -> Option<&FlowField> {
        match kind {
            FlowKind::TmpLeft => self.tmp_left.as_ref(),
            FlowKind::SkipLeft => self.skip_left.as_ref(),
            FlowKind::Stereo => self.stereo.as_ref(),
            FlowKind::TmpRight => self.tmp_right.as_ref(),
        }
    }

    pub fn set(&mut self, kind: FlowKind, flow: FlowField) {
        let slot = match kind {
            FlowKind::TmpLeft => &mut self.tmp_left,
            FlowKind::SkipLeft => &mut self.skip_left,
            FlowKind::Stereo => &mut self.stereo,
            FlowKind::TmpRight => &mut self.tmp_right,
        };
        *slot = Some(flow);
    }

    fn require(&self, frame: usize, kind: FlowKind) -> Result<&FlowField> {
        self.get(kind).ok_or(Error::MissingFlow { frame, kind })
    }
}

/// Which consistency metrics a report evaluates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MetricSelection {
    Temporal,
    Stereo,
    #[default]
    Both,
}

impl MetricSelection {
    pub fn temporal(self) -> bool {
        matches!(self, MetricSelection::Temporal | MetricSelection::Both)
    }

    pub fn stereo(self) -> bool {
        matches!(self, MetricSelection::Stereo | MetricSelection::Both)
    }

    /// Frame indices that carry a record for a sequence of `frames` frames,
    /// and the flows each needs from frames `t` and `t + 1`.
    pub fn record_count(self, frames: usize) -> Result<usize> {
        if self.temporal() && frames < 3 {
            return Err(Error::SequenceTooShort {
                metric: "E_tmp",
                required: 3,
                found: frames,
            });
        }
        if self.stereo() && frames < 2 {
            return Err(Error::SequenceTooShort {
                metric: "E_st",
                required: 2,
                found: frames,
            });
        }
        Ok(if self.stereo() { frames - 1 } else { frames - 2 })
    }

    /// Flow kinds frame `t` (first list) and `t + 1` (second list) must
    /// provide for the record of frame `t`.
    pub fn required_flows(self, t: usize, frames: usize) -> (alloc::vec::Vec<FlowKind>, alloc::vec::Vec<FlowKind>) {
        let mut cur = alloc::vec::Vec::new();
        let mut next = alloc::vec::Vec::new();
        if self.temporal() && t + 2 < frames {
            cur.extend([FlowKind::SkipLeft, FlowKind::TmpLeft]);
            next.push(FlowKind::TmpLeft);
        }
        if self.stereo() && t + 1 < frames {
            for k in [FlowKind::TmpLeft, FlowKind::Stereo, FlowKind::TmpRight] {
                if !cur.contains(&k) {
                    cur.push(k);
                }
            }
            next.push(FlowKind::Stereo);
        }
        (cur, next)
    }
}

/// Consistency metrics of one frame.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrameRecord {
    pub frame: usize,
    pub e_tmp: Option<EpeStats>,
    pub e_st: Option<EpeStats>,
}

/// Evaluates the selected metrics for frame `t` of a `frames`-long sequence,
/// given the flows of frames `t` and `t + 1`.
pub fn frame_record(
    t: usize,
    frames: usize,
    current: &FrameFlows,
    next: Option<&FrameFlows>,
    selection: MetricSelection,
    direction: FlowDirection,
) -> Result<FrameRecord> {
    let empty = FrameFlows::default();
    let next_flows = next.unwrap_or(&empty);
    let mut record = FrameRecord {
        frame: t,
        e_tmp: None,
        e_st: None,
    };
    if selection.temporal() && t + 2 < frames {
        let skip = current.require(t, FlowKind::SkipLeft)?;
        let step0 = current.require(t, FlowKind::TmpLeft)?;
        let step1 = next_flows.require(t + 1, FlowKind::TmpLeft)?;
        record.e_tmp = Some(match direction {
            FlowDirection::Source => temporal_consistency_epe(skip, step0, step1)?,
            FlowDirection::Target => temporal_consistency_epe(skip, step1, step0)?,
        });
    }
    if selection.stereo() && t + 1 < frames {
        let tmp_r = current.require(t, FlowKind::TmpRight)?;
        let tmp_l = current.require(t, FlowKind::TmpLeft)?;
        let st_t = current.require(t, FlowKind::Stereo)?;
        let st_t1 = next_flows.require(t + 1, FlowKind::Stereo)?;
        record.e_st = Some(match direction {
            FlowDirection::Source => stereo_consistency_epe(tmp_r, st_t1, st_t, tmp_l)?,
            FlowDirection::Target => stereo_consistency_epe(st_t1, tmp_r, tmp_l, st_t)?,
        });
    }
    Ok(record)
}
