//! File formats, parallel drivers and the command-line front end for
//! `rabi-core`.

pub mod commands;
pub mod error;
pub mod format;
pub mod ingest;
pub mod manifest;
pub mod parallel;
pub mod verify;

pub use error::{exit, CliError};
