//! Command-line front end for `simcap`.
//!
//! Commands read JSON state or channel descriptions, run analyses and
//! simulations, and write CSV tables with a manifest recording parameters,
//! seed, version and output digests.

pub mod app;
pub mod commands;
pub mod error;
pub mod input;
pub mod output;

pub use app::run;
pub use error::CliError;
