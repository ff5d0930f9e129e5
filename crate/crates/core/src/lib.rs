//! Prediction-error identification of discrete-time state-space models
//! with a jointly parameterized inverse noise model.

pub mod benchmarks;
pub mod config;
pub mod diff;
pub mod error;
pub mod io;
pub mod metrics;
pub mod models;
pub mod nets;
pub mod training;

pub use error::{Error, Result};
