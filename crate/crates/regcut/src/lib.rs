//! Command-line harness for `regcut-core`: graph and checkpoint files, JSON
//! experiment configs, parallel seeded benchmarks and result tables.

pub mod cli;
pub mod config;
mod error;
pub mod experiment;
pub mod files;
pub mod table;

pub use error::{HarnessError, Result};
