//! File formats, parallel drivers and the `licds` command-line tool on top
//! of `licds_core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod json;
pub mod parallel;
pub mod suite;

pub use error::CliError;
