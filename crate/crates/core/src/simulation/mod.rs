//! Samplers: exact fGn, the stationary fOU with a burn-in start, the
//! physical fBM slow/fast pair and the slow/fast averaging system.
//!
//! Every sampler is a pure function of its parameters, grid and
//! [`SeedSpec`](crate::domain::SeedSpec). The `*Sampler` structs cache the
//! expensive setup (factorizations, FFT plans) for Monte Carlo loops.

mod fgn;
mod fou;
mod physical;
mod tfe;

pub use fgn::{embedding_lags, sample_fbm, sample_fgn, FgnMethod, FgnSampler, ToeplitzSampler, CIRCULANT_THRESHOLD};
pub use fou::{
    fou_recursion, kernel_weight, sample_stationary_fou, FouDraw, FouSettings, StationaryFouSampler,
};
pub use physical::{sample_physical_fbm, PhysicalFbmSample, PhysicalFbmSampler, PhysicalSlowSampler};
pub use tfe::{sample_tfe_system, TfeSampler, TfeSystemSample};
