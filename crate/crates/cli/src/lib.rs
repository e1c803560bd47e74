//! Command-line front end for design sweeps of the inductively shunted
//! Josephson junction.

pub mod cli;
pub mod config;
pub mod error;
pub mod ops;
pub mod output;
pub mod records;

pub use config::Config;
pub use error::{CliError, CliResult};
