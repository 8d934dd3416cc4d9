//! Metrics, cross-validation, noise sweeps, trajectory summaries and the
//! Friedman rank test.

mod cv;
pub mod friedman;
pub mod metrics;
mod sweep;
pub mod trajectory;

pub use cv::{cross_validate, cross_validate_runs, CvOptions, FoldResult, FoldRun, MetricReport, Summary};
pub use friedman::{friedman_from_mean_ranks, friedman_test, FriedmanResult, RankMatrix};
pub use metrics::{accuracy, auc, f1, log_loss, score_all, Scores};
pub use sweep::{noise_sweep, test_label_hash, write_sweep_csv, SweepRow, SWEEP_CSV_HEADER};
pub use trajectory::{early_margins, trajectory_summary, Category, CategoryCurve, TrajectorySummary};
