//! Configuration, file formats, the end-to-end pipeline and the command-line
//! interface around `displaced-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;

pub use config::Config;
pub use error::{LabError, Result};
