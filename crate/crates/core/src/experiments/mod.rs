mod config;
mod lowerbound;
mod stats;
mod study;

pub use config::{ExperimentConfig, LowerBoundSpec, MetricMode, OutputPaths, StudyKind, SCHEMA, THREADS_ENV};
pub use lowerbound::{calibrated_n, rate_proxy, run_lowerbound_report, target_rate, LowerBoundSummary};
pub use stats::{fit_loglog_slope, SlopeFit};
pub use study::{
    read_rows, replication_stream, run_adaptation_study, run_rate_study, run_study, summarize_csv,
    summarize_rows, write_plot_data, RateRow, SizeSummary, StudySummary, StudyOutput, CSV_HEADER,
};
