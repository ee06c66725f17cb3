//! Configuration, presets, output and the command implementations behind the `crossdiff` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod profile;
pub mod scan;
