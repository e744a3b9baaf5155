//! Pool-based active learning for L2-regularized logistic regression:
//! data loading and synthetic generators, a Newton trainer, nine query
//! strategies plus a random baseline, a reproducible benchmark engine,
//! and preference-map density estimation.

pub mod classifier;
pub mod data;
pub mod engine;
pub mod error;
pub mod prefmap;
pub mod stats;
pub mod strategies;

pub use error::{Error, Result};
