//! Benchmark orchestration: configs with per-backbone defaults, dataset
//! loading, the record-parallel runner, reports and token heat maps.

mod config;
mod dataset;
mod heat;
mod profile;
mod report;
mod run;

pub use config::{
    FactorSplit, ReportFormat, Resolved, TaskConfig, TaskKind, DEFAULT_JUDGE_TEMPLATE, DEFAULT_QA_TEMPLATE,
};
pub use dataset::{load_dataset, parse_dataset, Dataset, FactorItem, GenItem, HaluEvalItem, McItem};
pub use heat::{emit_token_heat, heat_classes, render_token_heat, HEAT_CLASSES};
pub use profile::{profile_for, Profile, GENERIC_BACKBONE};
pub use report::{emit_report, metrics_csv};
pub use run::{config_hash, run_task, run_with, RecordOutput, RunReport, RunStats, Skipped};
