//! Command-line front end: vector files, sketch files and self-tests.

pub mod commands;
pub mod error;
pub mod selftest;
pub mod vector;

pub use error::{CliError, CliResult};
pub use vector::VectorFile;
