//! Simulator and analytics for distributed conditional-GAN channel learning
//! over a UAV fleet.

pub mod channel;
pub mod config;
pub mod convergence;
pub mod error;
pub mod experiment;
pub mod learner;
pub mod protocol;
pub mod scenario;
pub mod topology;

pub use error::{Error, Result};
