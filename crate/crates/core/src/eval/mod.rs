//! Ranking metrics, split protocols, significance tests and experiment reports.

mod experiment;
mod metrics;
mod rank;
mod splits;
mod stats;

pub use experiment::{
    evaluate_contexts, run_experiment, AblationRow, Comparison, ExperimentConfig, Method, MethodSummary, Report,
    SplitResult, REPORT_FORMAT,
};
pub use metrics::{
    average_precision, expected_random_ap, expected_random_ap_for, mean_ap, rank_by_scores, relevant_label,
    MapSummary, RankedList,
};
pub use rank::{filter_scores, rank_and_filter, RankOutcome, DEFAULT_THRESHOLD};
pub use splits::{make_splits, Protocol, Split, SplitSpec};
pub use stats::{paired_t_test, PairedTTest, DEGENERATE_P};
