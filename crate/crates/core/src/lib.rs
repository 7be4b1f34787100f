//! Approximate definable choices for bounded closed semialgebraic sets, with
//! exact symbolic construction and grid-based numeric verification.

pub mod choice;
pub mod config;
pub mod error;
pub mod evalhaus;
pub mod exact;
pub mod formula;
pub mod interval;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use config::PipelineConfig;
