//! Evaluation: comparison metrics, answer aggregation, ground truth, and
//! report generation.
//!
//! The scoring path is deterministic end to end: aggregates use sorted maps,
//! reports carry no timestamps, and re-evaluating the same results against
//! the same truth produces byte-identical JSON.

mod aggregate;
mod metrics;
mod report;
mod truth;

pub use aggregate::{likert_aggregate, spending_aggregate, winner_takes_all, LikertDimension, WinnerCall};
pub use metrics::{accuracy, kl_divergence, nrmse, rmse};
pub use report::{
    evaluate, EconomicGroupReport, ElectionGroupReport, EvaluationDetail, EvaluationReport,
    NewsDimensionReport, SubsetReport,
};
pub use truth::{ElectionGroupTruth, GroundTruth, NewsDimensionTruth};
