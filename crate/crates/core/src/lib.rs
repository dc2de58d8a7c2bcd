//! Topic-model stability benchmarking: synthetic LDA corpora with known
//! ground truth, repeated collapsed-Gibbs fits under document shuffling,
//! and similarity-based instability measurement across topic counts.

pub mod alignment;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod generation;
pub mod harness;
pub mod ingestion;
pub mod inference;
pub mod measures;
pub mod seed;
pub mod stability;
pub mod types;

pub use error::{Error, Result};
