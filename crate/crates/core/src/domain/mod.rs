//! Shared value types: sampling grids, discrete paths, parameter bundles and
//! seeded random streams.
//!
//! Everything here is an immutable value object and is `Send + Sync`.

mod grid;
mod params;
mod path;
mod seed;

pub use grid::{make_grid, SamplingGrid};
pub use params::{FouParams, MultiscaleParams, TfeSystemParams};
pub use path::{increments, second_order_increments, IncrementVector, Trajectory};
pub use seed::{NoiseStream, SeedSpec};

pub(crate) fn check_hurst(hurst: f64) -> crate::Result<()> {
    if hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        Err(crate::Error::invalid(format!(
            "Hurst parameter must lie in (0, 1), got {hurst}"
        )))
    }
}
