//! Scenario files, experiment orchestration and plot emission for the
//! `lvpatch` command-line tool.

pub mod commands;
mod error;
pub mod plot;
pub mod scenario;

pub use error::CliError;
pub use scenario::Scenario;
