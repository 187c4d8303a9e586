//! Calibration of piecewise-linear drivers and the explicit solution map of
//! the fOU model driven by them.
//!
//! On a cell of width `δ` with driver slope `c`, `dx = -θx dt + σc dt` has
//! the solution `x_k = e^{-θδ} x_{k-1} + (1 - e^{-θδ}) σ c / θ`. Inverting it
//! cell by cell recovers the slopes that reproduce an observed trajectory.

use serde::Serialize;

use crate::domain::{FouParams, NoiseStream, SamplingGrid, SeedSpec, Trajectory};
use crate::signature::{level_for_hurst, rough_pvar_distance, ScalarRoughLift};
use crate::simulation::{fou_recursion, FgnMethod, FgnSampler};
use crate::stats::ols_slope;
use crate::{Error, Result};

/// Driver slopes on each cell of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub gradients: Vec<f64>,
    pub grid: SamplingGrid,
    /// Model parameters the slopes were calibrated under; `None` for plain
    /// interpolation.
    pub params: Option<FouParams>,
}

impl CalibrationResult {
    /// Node values of the piecewise-linear driver started at `start`.
    pub fn driver_path(&self, start: f64) -> Trajectory {
        let delta = self.grid.delta();
        let mut values = Vec::with_capacity(self.gradients.len() + 1);
        let mut acc = start;
        values.push(acc);
        for c in &self.gradients {
            acc += delta * c;
            values.push(acc);
        }
        Trajectory::new(self.grid, values).expect("finite slopes give a finite path")
    }
}

/// `(1 - e^{-θδ}) / θ`, continuous at `θ = 0`. A two-term Taylor expansion
/// takes over for `θδ < 1e-8`.
pub fn decay_integral(theta: f64, delta: f64) -> f64 {
    let x = theta * delta;
    if x.abs() < 1e-8 {
        delta * (1.0 - 0.5 * x)
    } else {
        -(-x).exp_m1() / theta
    }
}

/// Slopes of the linear interpolation of a driver: `c_k = ΔB_k / δ`.
pub fn interpolation_calibration(driver: &Trajectory) -> CalibrationResult {
    let delta = driver.grid().delta();
    CalibrationResult {
        gradients: driver.values().windows(2).map(|w| (w[1] - w[0]) / delta).collect(),
        grid: *driver.grid(),
        params: None,
    }
}

/// Slopes `c_k = θ(x_k − x_{k-1} e^{-θδ}) / (σ(1 − e^{-θδ}))` that make the
/// piecewise-linear-driven model pass through every observation.
pub fn inverse_calibration(x: &Trajectory, params: &FouParams) -> Result<CalibrationResult> {
    params.validate()?;
    let delta = x.grid().delta();
    let decay = (-params.theta * delta).exp();
    let scale = params.sigma * decay_integral(params.theta, delta);
    Ok(CalibrationResult {
        gradients: x
            .values()
            .windows(2)
            .map(|w| (w[1] - w[0] * decay) / scale)
            .collect(),
        grid: *x.grid(),
        params: Some(*params),
    })
}

/// Exact solution of the model driven by the piecewise-linear path with the
/// given slopes, started from `x0`.
pub fn forward_map(c: &CalibrationResult, params: &FouParams, x0: f64) -> Result<Trajectory> {
    params.validate()?;
    if !x0.is_finite() {
        return Err(Error::invalid("initial value must be finite"));
    }
    let delta = c.grid.delta();
    let decay = (-params.theta * delta).exp();
    let scale = params.sigma * decay_integral(params.theta, delta);
    let mut values = Vec::with_capacity(c.gradients.len() + 1);
    let mut x = x0;
    values.push(x);
    for g in &c.gradients {
        x = decay * x + scale * g;
        values.push(x);
    }
    Trajectory::new(c.grid, values)
}

/// Trajectory of the piecewise-linear-driven model with the fGn driver of
/// `seed`, started from the invariant law by running the recursion over a
/// burn-in of `burn_in` time units before `t = 0`.
pub fn sample_approximate_fou(
    params: &FouParams,
    grid: &SamplingGrid,
    seed: SeedSpec,
    burn_in: f64,
) -> Result<Trajectory> {
    let sampler = ApproximateFouSampler::new(params, grid, burn_in)?;
    Ok(sampler.sample(seed))
}

/// Reusable form of [`sample_approximate_fou`].
#[derive(Debug, Clone)]
pub struct ApproximateFouSampler {
    params: FouParams,
    grid: SamplingGrid,
    burn_cells: usize,
    fgn: FgnSampler,
}

impl ApproximateFouSampler {
    pub fn new(params: &FouParams, grid: &SamplingGrid, burn_in: f64) -> Result<Self> {
        params.validate()?;
        if !(burn_in >= 0.0 && burn_in.is_finite()) {
            return Err(Error::invalid("burn-in must be finite and non-negative"));
        }
        let burn_cells = (burn_in / grid.delta()).ceil() as usize;
        let fgn = FgnSampler::new(params.hurst, grid.delta(), burn_cells + grid.count())?;
        Ok(Self {
            params: *params,
            grid: *grid,
            burn_cells,
            fgn,
        })
    }

    pub fn sample(&self, seed: SeedSpec) -> Trajectory {
        let inc = self.fgn.sample(&mut seed.rng(NoiseStream::Fractional));
        let delta = self.grid.delta();
        let decay = (-self.params.theta * delta).exp();
        // σ φ_δ(θ) ΔB = σ (1 - e^{-θδ})/θ · ΔB/δ
        let gain = self.params.sigma * decay_integral(self.params.theta, delta) / delta;
        let (burn, observed) = inc.split_at(self.burn_cells);
        let mut x = burn.iter().fold(0.0, |x, d| decay * x + gain * d);
        let mut values = Vec::with_capacity(observed.len() + 1);
        values.push(x);
        for d in observed {
            x = decay * x + gain * d;
            values.push(x);
        }
        Trajectory::new(self.grid, values).expect("finite recursion")
    }
}

/// Settings of [`convergence_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticSettings {
    /// Coarsest observation step `δ_0`.
    pub delta0: f64,
    /// Observation horizon; a multiple of `delta0`.
    pub horizon: f64,
    /// Finest level `n_max`; levels `0..=n_max` use `δ_n = 2^{-n} δ_0`.
    pub levels: usize,
    /// Variation exponent, `p > 1/H`.
    pub p: f64,
    /// Sub-steps per finest cell for the reference fOU path.
    pub substeps: usize,
}

impl Default for DiagnosticSettings {
    fn default() -> Self {
        Self {
            delta0: 0.125,
            horizon: 4.0,
            levels: 6,
            p: 1.6,
            substeps: 4,
        }
    }
}

/// Per-level output of [`convergence_diagnostic`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub deltas: Vec<f64>,
    /// Rough p-variation distance between the lifts of the interpolated and
    /// the calibrated driver.
    pub distances: Vec<f64>,
    /// Root mean square over cells of `δ |c_B − c_x|`.
    pub gradient_gap: Vec<f64>,
    /// Least-squares slope of `log gradient_gap` against `log δ`.
    pub gap_order: f64,
}

impl ConvergenceReport {
    pub fn is_non_increasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Compares, level by level, the piecewise-linear interpolation of one fBM
/// path with the driver recovered by [`inverse_calibration`] from the fOU
/// solution it generates.
///
/// The reference fOU path is the kernel recursion on a grid `substeps` times
/// finer than the finest level, started at zero.
pub fn convergence_diagnostic(
    seed: SeedSpec,
    params: &FouParams,
    settings: &DiagnosticSettings,
) -> Result<ConvergenceReport> {
    params.validate()?;
    if !(params.hurst > 0.25) {
        return Err(Error::Unsupported(format!(
            "the diagnostic needs H > 1/4, got {}",
            params.hurst
        )));
    }
    if !(settings.p * params.hurst > 1.0) {
        return Err(Error::invalid(format!(
            "p = {} must exceed 1/H = {}",
            settings.p,
            1.0 / params.hurst
        )));
    }
    if settings.substeps == 0 {
        return Err(Error::invalid("substeps must be at least 1"));
    }
    let coarse = crate::domain::make_grid(settings.delta0, settings.horizon)?;
    let finest_factor = 1usize << settings.levels;
    let fine_factor = finest_factor * settings.substeps;
    let fine = coarse.refine(fine_factor)?;
    let fgn = FgnSampler::with_method(
        params.hurst,
        fine.delta(),
        fine.count(),
        if fine.count() > crate::simulation::CIRCULANT_THRESHOLD {
            FgnMethod::Circulant
        } else {
            FgnMethod::Auto
        },
    )?;
    let inc = fgn.sample(&mut seed.rng(NoiseStream::Fractional));
    let mut b = Vec::with_capacity(inc.len() + 1);
    b.push(0.0);
    let mut acc = 0.0;
    for d in &inc {
        acc += d;
        b.push(acc);
    }
    let x = fou_recursion(params.theta, params.sigma, 0.0, &inc, fine.delta());
    let lift_level = level_for_hurst(params.hurst)?;

    let mut report = ConvergenceReport {
        deltas: Vec::new(),
        distances: Vec::new(),
        gradient_gap: Vec::new(),
        gap_order: f64::NAN,
    };
    for n in 0..=settings.levels {
        let stride = fine_factor >> n;
        let grid = coarse.refine(1 << n)?;
        let pick = |v: &[f64]| -> Vec<f64> { v.iter().step_by(stride).copied().collect() };
        let driver = Trajectory::new(grid, pick(&b))?;
        let obs = Trajectory::new(grid, pick(&x))?;
        let cb = interpolation_calibration(&driver);
        let cx = inverse_calibration(&obs, params)?;
        let calibrated = cx.driver_path(0.0);
        let a = ScalarRoughLift::new(driver.into_values(), lift_level, settings.p)?;
        let c = ScalarRoughLift::new(calibrated.into_values(), lift_level, settings.p)?;
        report.distances.push(rough_pvar_distance(&a, &c)?);
        let delta = grid.delta();
        let gap = (cb
            .gradients
            .iter()
            .zip(&cx.gradients)
            .map(|(u, v)| (delta * (u - v)).powi(2))
            .sum::<f64>()
            / grid.count() as f64)
            .sqrt();
        report.gradient_gap.push(gap);
        report.deltas.push(delta);
    }
    if report.gradient_gap.iter().all(|g| *g > 0.0) {
        let lx: Vec<f64> = report.deltas.iter().map(|d| d.ln()).collect();
        let ly: Vec<f64> = report.gradient_gap.iter().map(|g| g.ln()).collect();
        report.gap_order = ols_slope(&lx, &ly)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn calibration_examples() {
        let grid = SamplingGrid::with_count(1.0, 1).unwrap();
        let x = Trajectory::new(grid, vec![0.0, 1.0]).unwrap();
        let p = FouParams::new(1.0, 1.0, 0.7).unwrap();
        let c = inverse_calibration(&x, &p).unwrap();
        assert_relative_eq!(c.gradients[0], 1.581977, epsilon = 5e-7);

        let c = CalibrationResult {
            gradients: vec![0.0],
            grid,
            params: None,
        };
        let y = forward_map(&c, &p, 1.0).unwrap();
        assert_relative_eq!(y.values()[1], 0.367879, epsilon = 5e-7);

        let bad = FouParams {
            theta: 1.0,
            sigma: 0.0,
            hurst: 0.7,
        };
        assert!(inverse_calibration(&x, &bad).is_err());
    }

    #[test]
    fn interpolation_examples() {
        let grid = SamplingGrid::with_count(0.1, 2).unwrap();
        let b = Trajectory::new(grid, vec![0.0, 0.1, 0.2]).unwrap();
        let c = interpolation_calibration(&b);
        assert!(c.gradients.iter().all(|g| (g - 1.0).abs() < 1e-14));
        let back = c.driver_path(0.0);
        for (u, v) in back.values().iter().zip(b.values()) {
            assert!((u - v).abs() < 1e-15);
        }
        let flat = Trajectory::new(grid, vec![2.0; 3]).unwrap();
        assert!(interpolation_calibration(&flat).gradients.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn zero_theta_is_integration() {
        let grid = SamplingGrid::with_count(0.1, 3).unwrap();
        let p = FouParams::new(0.0, 2.0, 0.7).unwrap();
        let c = CalibrationResult {
            gradients: vec![1.0, -2.0, 0.5],
            grid,
            params: None,
        };
        let x = forward_map(&c, &p, 1.0).unwrap();
        assert_relative_eq!(x.values()[3], 1.0 + 2.0 * 0.1 * (1.0 - 2.0 + 0.5), epsilon = 1e-14);
        let back = inverse_calibration(&x, &p).unwrap();
        let plain = interpolation_calibration(&x.affine(-1.0 / 2.0, 0.5).unwrap());
        for (a, b) in back.gradients.iter().zip(&plain.gradients) {
            assert_relative_eq!(*a, *b, max_relative = 1e-12);
        }
    }

    #[test]
    fn theta_limit_is_continuous() {
        for delta in [1.0, 0.1, 0.01] {
            let a = decay_integral(1e-8, delta);
            let b = decay_integral(0.0, delta);
            assert_relative_eq!(a, b, max_relative = 1e-6);
            // straddling the series switch
            for theta in [0.999e-8 / delta, 1.001e-8 / delta] {
                let x = theta * delta;
                let series = delta * (1.0 - x / 2.0 + x * x / 6.0);
                assert_relative_eq!(decay_integral(theta, delta), series, max_relative = 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn round_trips(
            theta in prop::sample::select(vec![0.0, 0.5, 2.0]),
            delta in prop::sample::select(vec![1.0, 0.1, 0.01]),
            c in prop::collection::vec(-3.0f64..3.0, 1..50),
            x0 in -2.0f64..2.0,
        ) {
            let grid = SamplingGrid::with_count(delta, c.len()).unwrap();
            let p = FouParams::new(theta, 0.8, 0.7).unwrap();
            let cal = CalibrationResult { gradients: c.clone(), grid, params: None };
            let x = forward_map(&cal, &p, x0).unwrap();
            let back = inverse_calibration(&x, &p).unwrap();
            for (u, v) in back.gradients.iter().zip(&c) {
                prop_assert!((u - v).abs() <= 1e-10 * v.abs().max(1.0));
            }
            let again = forward_map(&back, &p, x0).unwrap();
            for (u, v) in again.values().iter().zip(x.values()) {
                prop_assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn diagnostic_collapses_at_zero_theta() {
        let p = FouParams::new(0.0, 1.0, 0.7).unwrap();
        let s = DiagnosticSettings {
            levels: 3,
            ..Default::default()
        };
        let r = convergence_diagnostic(SeedSpec::new(1, 0), &p, &s).unwrap();
        assert!(r.distances.iter().all(|d| *d < 1e-12), "{:?}", r.distances);
    }

    #[test]
    fn approximate_sampler_starts_after_burn_in() {
        let p = FouParams::new(1.0, 1.0, 0.7).unwrap();
        let grid = SamplingGrid::with_count(0.1, 10).unwrap();
        let a = sample_approximate_fou(&p, &grid, SeedSpec::new(0, 0), 5.0).unwrap();
        let b = sample_approximate_fou(&p, &grid, SeedSpec::new(0, 0), 0.0).unwrap();
        assert_eq!(b.start(), 0.0);
        assert_ne!(a.start(), 0.0);
        assert_eq!(a.values().len(), 11);
    }
}
