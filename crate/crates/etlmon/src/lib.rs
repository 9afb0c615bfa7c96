//! File formats, dataset generation and pipelines around [`etl_core`], plus the `etlmon`
//! command-line front end.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod formats;
pub mod pipeline;

pub use error::{Error, Result};
