//! Experiment driver: TOML configs, the pipelines behind each subcommand,
//! CSV/PNG output and run comparison.

pub mod compare;
pub mod config;
pub mod error;
pub mod io;
pub mod run;

pub use compare::{compare, CompareReport};
pub use config::{ExperimentConfig, Mode};
pub use error::{CliError, Result};
pub use run::{run, Manifest};
