//! Image-consistency losses and flow-based sequence consistency metrics.

mod loss;
mod metrics;
mod report;
mod ssim;

pub use loss::{
    adversarial_loss, cycle_loss, image_consistency, stereo_loss, temporal_loss, total_loss,
    AdversarialLoss, LossTerms, LossWeights, ScoreMap,
};
pub use metrics::{
    frame_record, stereo_consistency_epe, temporal_consistency_epe, FlowDirection, FlowKind,
    FrameFlows, FrameRecord, MetricSelection,
};
pub use report::{sequence_report, ConsistencyReport, MetricAggregate};
pub use ssim::{ssim, ssim_with, SsimMap, SsimParams};
