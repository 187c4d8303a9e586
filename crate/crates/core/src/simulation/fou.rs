use rand::Rng;
use rand_distr::StandardNormal;

use super::FgnSampler;
use crate::covariance::stationary_fou_variance;
use crate::domain::{check_hurst, NoiseStream, SamplingGrid, SeedSpec, Trajectory};
use crate::{Error, Result};

/// Discretization knobs for the stationary fOU sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FouSettings {
    /// Minimum number of sub-steps per observation cell.
    pub refinement: usize,
    /// Upper bound on `λh` for the sub-step `h`; the refinement is raised
    /// until it holds.
    pub max_step: f64,
    /// Burn-in length in units of `1/λ`; 19 gives `e^{-λL} < 1e-8`.
    pub burn_in: f64,
}

impl Default for FouSettings {
    fn default() -> Self {
        Self {
            refinement: 16,
            max_step: 0.1,
            burn_in: 19.0,
        }
    }
}

impl FouSettings {
    fn validate(&self) -> Result<()> {
        if self.refinement == 0 {
            return Err(Error::invalid("refinement must be at least 1"));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::invalid("max_step must be positive"));
        }
        if !(self.burn_in >= 0.0) {
            return Err(Error::invalid("burn_in must be non-negative"));
        }
        Ok(())
    }
}

/// `(1 - e^{-x}) / x`: the exact weight of `∫ e^{-λ(t+h-s)} dB_s` when `B` is
/// linear on the sub-step, `x = λh`.
pub fn kernel_weight(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// `y_{k+1} = e^{-λh} y_k + β w(λh) ΔB_k` over the given driver increments;
/// returns `len + 1` values starting with `y0`.
pub fn fou_recursion(lambda: f64, beta: f64, y0: f64, increments: &[f64], step: f64) -> Vec<f64> {
    let decay = (-lambda * step).exp();
    let gain = beta * kernel_weight(lambda * step);
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut y = y0;
    out.push(y);
    for d in increments {
        y = decay * y + gain * d;
        out.push(y);
    }
    out
}

/// One stationary fOU draw on the observation grid together with the
/// driver `B^H` (started at zero) on the same nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FouDraw {
    pub fast: Vec<f64>,
    pub driver: Vec<f64>,
}

/// Stationary solution of `dY = -λY dt + β dB^H` sampled on a grid.
///
/// For `H ≠ 1/2` the driver is simulated exactly on a sub-grid of step
/// `h = δ/M`, `Y` is started at zero a burn-in time `L` before the first
/// node and propagated by [`fou_recursion`]. At `H = 1/2` each observation
/// step is drawn from the exact joint law of `(ΔB, ∫e^{-λ(t-s)}dB)` and `Y_0`
/// from the invariant law, so no discretization error remains.
#[derive(Debug, Clone)]
pub struct StationaryFouSampler {
    lambda: f64,
    beta: f64,
    hurst: f64,
    grid: SamplingGrid,
    substeps: usize,
    burn_steps: usize,
    fgn: Option<FgnSampler>,
}

impl StationaryFouSampler {
    pub fn new(
        lambda: f64,
        beta: f64,
        hurst: f64,
        grid: &SamplingGrid,
        settings: &FouSettings,
    ) -> Result<Self> {
        check_hurst(hurst)?;
        settings.validate()?;
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!("mean reversion must be > 0, got {lambda}")));
        }
        if !beta.is_finite() {
            return Err(Error::invalid("noise scale must be finite"));
        }
        let delta = grid.delta();
        let (substeps, burn_steps, fgn) = if hurst == 0.5 {
            (1, 0, None)
        } else {
            let m = settings
                .refinement
                .max((lambda * delta / settings.max_step).ceil() as usize);
            let h = delta / m as f64;
            let burn = (settings.burn_in / (lambda * h)).ceil() as usize;
            let total = burn + grid.count() * m;
            (m, burn, Some(FgnSampler::new(hurst, h, total)?))
        };
        Ok(Self {
            lambda,
            beta,
            hurst,
            grid: *grid,
            substeps,
            burn_steps,
            fgn,
        })
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    /// Sub-steps per observation cell actually used.
    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn burn_steps(&self) -> usize {
        self.burn_steps
    }

    /// Draws from the fractional stream of `seed`.
    pub fn sample(&self, seed: SeedSpec) -> FouDraw {
        self.sample_with(&mut seed.rng(NoiseStream::Fractional))
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> FouDraw {
        match &self.fgn {
            None => self.sample_brownian(rng),
            Some(fgn) => {
                let inc = fgn.sample(rng);
                let h = self.grid.delta() / self.substeps as f64;
                let y = fou_recursion(self.lambda, self.beta, 0.0, &inc, h);
                let n = self.grid.count();
                let m = self.substeps;
                let mut fast = Vec::with_capacity(n + 1);
                let mut driver = Vec::with_capacity(n + 1);
                let mut b = 0.0;
                fast.push(y[self.burn_steps]);
                driver.push(0.0);
                for k in 0..n {
                    let from = self.burn_steps + k * m;
                    b += inc[from..from + m].iter().sum::<f64>();
                    fast.push(y[from + m]);
                    driver.push(b);
                }
                FouDraw { fast, driver }
            }
        }
    }

    fn sample_brownian<R: Rng + ?Sized>(&self, rng: &mut R) -> FouDraw {
        let lambda = self.lambda;
        let delta = self.grid.delta();
        // exact Gaussian step: (ΔB, U) with U = ∫_0^δ e^{-λ(δ-s)} dB_s
        let v_b = delta;
        let v_u = -(-2.0 * lambda * delta).exp_m1() / (2.0 * lambda);
        let c_bu = -(-lambda * delta).exp_m1() / lambda;
        let l11 = v_b.sqrt();
        let l21 = c_bu / l11;
        let l22 = (v_u - l21 * l21).max(0.0).sqrt();
        let decay = (-lambda * delta).exp();
        let stationary_sd = (0.5 / lambda).sqrt();

        let n = self.grid.count();
        let mut fast = Vec::with_capacity(n + 1);
        let mut driver = Vec::with_capacity(n + 1);
        let mut y = self.beta * stationary_sd * rng.sample::<f64, _>(StandardNormal);
        let mut b = 0.0;
        fast.push(y);
        driver.push(b);
        for _ in 0..n {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let db = l11 * z1;
            let u = l21 * z1 + l22 * z2;
            b += db;
            y = decay * y + self.beta * u;
            fast.push(y);
            driver.push(b);
        }
        FouDraw { fast, driver }
    }

    /// Stationary variance of the continuous-time process.
    pub fn stationary_variance(&self) -> f64 {
        stationary_fou_variance(self.hurst, self.lambda, self.beta)
            .expect("parameters validated at construction")
    }
}

/// Stationary fOU path on `grid` with the default [`FouSettings`].
pub fn sample_stationary_fou(
    lambda: f64,
    beta: f64,
    hurst: f64,
    grid: &SamplingGrid,
    seed: SeedSpec,
) -> Result<Trajectory> {
    let sampler = StationaryFouSampler::new(lambda, beta, hurst, grid, &FouSettings::default())?;
    Trajectory::new(*grid, sampler.sample(seed).fast)
}
