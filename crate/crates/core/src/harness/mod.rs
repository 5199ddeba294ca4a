//! Experiment orchestration: configs, the Monte Carlo driver, presets,
//! stream analysis, two-sample ingest and CSV output.

pub mod analyze;
pub mod config;
pub mod experiment;
pub mod presets;
pub mod report;
pub mod twosample;

pub use analyze::{
    analyze_stream, overlap_fraction, read_pvalue_csv, write_decisions_csv, DecisionLog, DecisionRow, PvalueTable,
};
pub use config::{config_hash, ExperimentConfig, PowerReference, RuleSpec, DEFAULT_PIS, DEFAULT_TRIALS, FULL_TRIALS};
pub use experiment::{curve_checkpoints, run_experiment, run_trial, RuleTrial};
pub use presets::{preset_configs, run_preset, PRESETS};
pub use report::{read_report_csv, write_curves_csv, write_report_csv, ReportTable, REPORT_COLUMNS};
pub use twosample::{
    read_expression_csv, read_labels_csv, two_sample_pvalues, write_two_sample_csv, Group, TwoSampleDataset,
    TwoSampleResult,
};
