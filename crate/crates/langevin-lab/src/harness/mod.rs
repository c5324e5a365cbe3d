//! Experiment harness: configuration, replicated-chain orchestration,
//! metric series, reference samplers, persistence and reporting.

mod config;
mod experiment;
mod reference;
mod report;
mod suite;

pub use config::{
    parse_config, BodySpec, ExperimentConfig, HalfspaceSpec, HistogramConfig, MetricKind,
    ScaleSpec, ScheduleKind, ScheduleSpec, TailSpec, TargetSpec,
};
pub use experiment::{
    emit_plot_data, fmt_float, records_to_jsonl, run_experiment, series_to_csv, ExperimentOutput,
    MetricRow, MetricSeries, SERIES_HEADER,
};
pub use reference::{exact_reference_sampler, ReferenceKind};
pub use report::{read_series_csv, report};
pub use suite::standard_bound_suite;
