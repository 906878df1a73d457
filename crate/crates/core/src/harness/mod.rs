//! Experiment orchestration: configuration and presets, reproducible
//! parallel execution of trials, persistence, and summary reports.

mod config;
mod records;
mod report;
mod run;

pub use config::{
    preset, AlgorithmConfig, CgExperiment, DeepNetExperiment, ExperimentConfig, InnerDimension, InputEnsemble,
    SpinGlassExperiment, PRESET_NAMES,
};
pub use records::{parse_records_csv, read_records, records_csv, write_text, TrialRecord, RECORDS_HEADER};
pub use report::{
    compare_ensembles, halting_times, reference_row, summarize, ComparisonReport, MomentDeltas, ReferenceRow, Summary,
    Verdict, DEFAULT_ALPHA, REFERENCE_ROWS,
};
pub use run::{run_experiment, run_experiment_detailed, write_outputs, write_summary, TrialDetail, TrialOutcome};
