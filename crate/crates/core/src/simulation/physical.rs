use super::fgn::{embedding_lags, ToeplitzSampler};
use super::{FouSettings, StationaryFouSampler, CIRCULANT_THRESHOLD};
use crate::covariance::physical_increment_autocovariance;
use crate::domain::{MultiscaleParams, NoiseStream, SamplingGrid, SeedSpec, Trajectory};
use crate::Result;

/// Slow position, fast velocity-like component and the limiting driver of
/// the physical fBM on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalFbmSample {
    pub grid: SamplingGrid,
    /// `X^ε`, started at zero.
    pub slow: Trajectory,
    /// `Y^ε`, stationary.
    pub fast: Trajectory,
    /// `σ B^H`, started at zero.
    pub driver: Trajectory,
}

/// Sampler for `dX = ε^{H-1} Y dt`, `dY = -Y/ε dt + σ ε^{-H} dB^H`.
///
/// The slow path is rebuilt from `X_t - X_0 = σ(B_t - B_0) - ε^H (Y_t - Y_0)`,
/// the identity obtained by eliminating `Y dt` between the two equations.
#[derive(Debug, Clone)]
pub struct PhysicalFbmSampler {
    params: MultiscaleParams,
    fou: StationaryFouSampler,
}

impl PhysicalFbmSampler {
    pub fn new(params: &MultiscaleParams, grid: &SamplingGrid, settings: &FouSettings) -> Result<Self> {
        params.validate()?;
        let eps = params.epsilon;
        let lambda = 1.0 / eps;
        let beta = params.sigma / eps.powf(params.hurst);
        Ok(Self {
            params: *params,
            fou: StationaryFouSampler::new(lambda, beta, params.hurst, grid, settings)?,
        })
    }

    pub fn fou(&self) -> &StationaryFouSampler {
        &self.fou
    }

    pub fn sample(&self, seed: SeedSpec) -> PhysicalFbmSample {
        let draw = self.fou.sample(seed);
        let sigma = self.params.sigma;
        let eps_h = self.params.epsilon.powf(self.params.hurst);
        let y0 = draw.fast[0];
        let slow: Vec<f64> = draw
            .driver
            .iter()
            .zip(&draw.fast)
            .map(|(b, y)| sigma * b - eps_h * (y - y0))
            .collect();
        let driver: Vec<f64> = draw.driver.iter().map(|b| sigma * b).collect();
        let grid = *self.fou.grid();
        let build = |v: Vec<f64>| Trajectory::new(grid, v).expect("sampler output is finite");
        PhysicalFbmSample {
            grid,
            slow: build(slow),
            fast: build(draw.fast),
            driver: build(driver),
        }
    }
}

/// One physical fBM draw with the default [`FouSettings`].
pub fn sample_physical_fbm(
    params: &MultiscaleParams,
    grid: &SamplingGrid,
    seed: SeedSpec,
) -> Result<PhysicalFbmSample> {
    Ok(PhysicalFbmSampler::new(params, grid, &FouSettings::default())?.sample(seed))
}

/// Exact draws of the slow component `X^ε` alone, on the observation grid.
///
/// The increments of `X^ε` form a stationary Gaussian sequence with the
/// covariance of [`physical_increment_autocovariance`], so no fine grid is
/// needed and the cost does not depend on `ε`. Draws are not coupled to
/// [`PhysicalFbmSampler`] draws of the same seed.
#[derive(Debug, Clone)]
pub struct PhysicalSlowSampler {
    grid: SamplingGrid,
    sampler: ToeplitzSampler,
}

impl PhysicalSlowSampler {
    pub fn new(params: &MultiscaleParams, grid: &SamplingGrid) -> Result<Self> {
        params.validate()?;
        let n = grid.count();
        let lags = if n > CIRCULANT_THRESHOLD { embedding_lags(n) } else { n };
        let acov = physical_increment_autocovariance(
            params.hurst,
            params.sigma,
            params.epsilon,
            grid.delta(),
            lags,
        )?;
        Ok(Self {
            grid: *grid,
            sampler: ToeplitzSampler::new(n, &acov)?,
        })
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn sample(&self, seed: SeedSpec) -> Trajectory {
        let inc = self.sampler.sample(&mut seed.rng(NoiseStream::Fractional));
        let mut values = Vec::with_capacity(inc.len() + 1);
        let mut acc = 0.0;
        values.push(acc);
        for d in inc {
            acc += d;
            values.push(acc);
        }
        Trajectory::new(self.grid, values).expect("sampler output is finite")
    }
}
