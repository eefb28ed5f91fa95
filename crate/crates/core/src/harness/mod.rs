//! Batch experiments: specs, per-replicate JSONL records with a manifest,
//! the validation suite and exponent-fit reports.
//!
//! Replicate `i` of an experiment runs on seed `mix64(master_seed, i)`
//! (see [`crate::rng::mix64`]), so any single record can be regenerated
//! without the others.

mod record;
mod report;
mod run;
mod spec;
mod validate;

pub use record::{key, split_key, to_json, Observed, ReplicateResult};
pub use report::{
    collect_samples, fit_report, read_results, render as render_fits, run_fit, to_csv, FitReport, ScaleSummary,
    FIT_TARGETS,
};
pub use run::{manifest_path, replicate, run, RunOptions, RunSummary};
pub use spec::{ExperimentSpec, Kind, Params};
pub use validate::{render as render_checks, suite, CheckOutcome};

#[cfg(test)]
mod tests;
