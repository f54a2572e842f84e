//! File formats, dataset handling, parallel helpers, verification suites and
//! the command-line front end around `rsketch-core`.

pub mod cli;
pub mod data;
pub mod error;
pub mod io;
pub mod parallel;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
