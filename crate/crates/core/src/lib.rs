//! Inference tools for fractional diffusions: fGn covariance algebra, exact
//! and controlled-error samplers, rough-path signatures, the inverse
//! calibration of piecewise-linear drivers, the approximate fOU likelihood,
//! subsampled estimators for multiscale data, trace-conjecture numerics and
//! trajectory fitting for a slow/fast system.

pub mod conjecture;
pub mod covariance;
pub mod domain;
mod error;
pub mod experiment;
pub mod inverse;
pub mod likelihood;
pub mod multiscale;
pub mod optimize;
pub mod signature;
pub mod simulation;
pub mod stats;
pub mod tfe;

pub use error::{Error, Result};
