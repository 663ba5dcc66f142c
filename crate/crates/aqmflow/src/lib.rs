//! Command-line front end for `aqmflow-core`: experiment configuration,
//! built-in presets, CSV output, reports and parameter sweeps.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod report;
pub mod run;
pub mod sweep;

pub use config::{parse_config, ConfigLoader, ExperimentConfig, ModelEntry};
pub use error::{CliError, ConfigError, Origin, Result};
