//! Qubit-state discrimination with next-generation reservoir computing.
//!
//! The crate covers the whole numerical path from readout records to
//! metrics: a synthetic dispersive-readout simulator ([`sim`]), the
//! demodulation/masking/windowing front end ([`dsp`]), polynomial feature
//! maps with exact cost accounting ([`features`]), boxcar and matched
//! filter baselines ([`baseline`]), closed-form and batched ridge training
//! ([`trainer`]), greedy term selection ([`select`]) and the fidelity and
//! cross-fidelity metrics ([`metrics`]).
//!
//! It is `no_std` and only needs an allocator. File formats, configuration
//! and the command line live in the `ngrc` crate.
#![no_std]

extern crate alloc;

pub mod baseline;
pub mod data;
pub mod dsp;
pub mod error;
pub mod features;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod select;
pub mod sim;
pub mod trainer;

pub use data::{IQTrace, Layout, Shot, ShotSet};
pub use error::{Error, Result};
pub use features::{Degree, FeatureMap, FeatureSpec, Frontend};
pub use linalg::Matrix;
pub use trainer::{Decode, Discriminator};
