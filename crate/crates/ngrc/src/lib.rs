//! File formats, pipelines, reports and the acceptance suite for NG-RC
//! qubit readout, built on [`ngrc_core`].

pub mod acceptance;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
pub use ngrc_core as core;
