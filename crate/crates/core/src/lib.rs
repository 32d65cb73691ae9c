//! Linear wavelet-projection density estimation and a seeded Monte Carlo
//! harness for the uniform behaviour of the estimator.

pub mod basis;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod grid;
pub mod increments;
pub mod kernel;
pub mod limit_sets;
pub mod sampling;

pub use error::{Error, Result};
