//! Library side of the `tasep` command: job configs, output rows and the
//! three commands. The binary only parses arguments and maps errors to exit
//! codes.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{cmd_prob, cmd_simulate, cmd_verify, prob_rows, simulate_rows, OutputOverride};
pub use config::{Format, Job, JobConfig, OutputSpec, SpectralSpec, StateSpec, Targets};
pub use error::CliError;
pub use output::Row;
