//! Reproducible, config-driven batch experiments.
//!
//! The `elastiloc` binary is a thin wrapper over this module: it parses
//! flags, loads a [`RunConfig`] and dispatches to one of the commands.
//! Every command writes a manifest of its inputs and outputs; rerunning a
//! command with the same configuration and inputs produces byte-identical
//! files.

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{
    cmd_ablate_sensors, cmd_evaluate, cmd_generate, cmd_report, cmd_train, cmd_tune,
};
pub use config::{Recipe, RunConfig};
