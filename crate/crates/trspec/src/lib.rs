//! Command-line layer over `trspec-core`: model files, report formats,
//! sweeps and the `trspec` subcommands.

pub mod cli;
pub mod error;
pub mod formats;
pub mod io;
pub mod sweep;

pub use error::{AppError, AppResult};
