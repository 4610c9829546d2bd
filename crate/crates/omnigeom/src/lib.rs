//! File formats, command-line front end and parallel drivers for
//! `omnigeom-core`.

pub mod annotations;
pub mod calib;
pub mod cgt;
pub mod cli;
pub mod commands;
pub mod error;
pub mod parallel;
pub mod pnm;
pub mod table;

pub use error::{CliError, Result};
