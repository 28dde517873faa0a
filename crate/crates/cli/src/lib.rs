//! Configuration-driven experiments on top of `graphsurf`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{
    cmd_constants, cmd_geometry, cmd_sweep, cmd_verify, run_constants, run_geometry, run_sweep, run_verify,
    RunOptions,
};
pub use config::{default_config, Config};
pub use error::CliError;
