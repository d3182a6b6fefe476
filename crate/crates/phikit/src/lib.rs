//! File formats, reports, the parallel bootstrap runner and the `phikit`
//! command line, on top of `phikit-core`.

pub mod cli;
pub mod embeddings;
mod error;
pub mod io;
pub mod keyfile;
pub mod manifest;
pub mod parallel;
pub mod report;

pub use error::{Error, Result};
pub use phikit_core as core;
