//! Experiment harness for `inclusion-core`: problem specifications, concurrent
//! runs with audits, CSV/JSON/SVG artifacts and the command-line subcommands.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use error::BenchError;
