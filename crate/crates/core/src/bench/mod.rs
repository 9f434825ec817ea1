//! Experimental protocol: instance suites, the end-to-end pipeline, repeated
//! runs of both solvers and CSV reports.

mod config;
mod pipeline;
mod report;

pub use config::{PipelineConfig, DEFAULT_DENSITY, DEFAULT_REPEATS};
pub use pipeline::{pipeline_embedding, run_pipeline, run_pipeline_detailed, PipelineOutcome};
pub use report::{
    instance_suite, run_benchmark, write_report, BenchmarkReport, BenchmarkRow, InstanceFailure,
    Method, RunRecord, SuiteMode, ORACLE_MAX_VARS,
};
