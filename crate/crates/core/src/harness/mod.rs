//! Configuration, presets and output writers for reproduction runs.

pub mod config;
pub mod run;

pub use config::{preset_paper_experiment, ExperimentConfig};
pub use run::{run, threads_from_env, with_threads, Manifest, RunMode};
