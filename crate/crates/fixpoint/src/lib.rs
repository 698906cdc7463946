//! File formats and the command-line driver for `fixpoint-core`.
//!
//! * [`mtx`]: Matrix Market coordinate files,
//! * [`vector`]: plain one-number-per-line vectors,
//! * [`report`]: JSON certificate documents,
//! * [`expr`]: the small expression language accepted by `fixpoint scalar`,
//! * [`cli`]: argument parsing and subcommand dispatch.

pub mod cli;
pub mod expr;
pub mod mtx;
pub mod report;
pub mod vector;

mod error;

pub use error::FormatError;
