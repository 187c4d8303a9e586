use rand::Rng;
use rand_distr::StandardNormal;

use super::{fou_recursion, FgnSampler};
use crate::domain::{NoiseStream, SamplingGrid, SeedSpec, TfeSystemParams, Trajectory};
use crate::{Error, Result};

/// Slow and fast components of the averaging system on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TfeSystemSample {
    pub grid: SamplingGrid,
    pub slow: Trajectory,
    pub fast: Trajectory,
    pub params: TfeSystemParams,
}

/// Sampler for
/// `dX = (-θX + Y) dt + √η dB^H`, `dY = -Y/ε dt + √(2/ε) dW`,
/// with `B^H` and `W` independent.
///
/// By linearity `X_t = x0 e^{-θt} + Z_t + √η V_t`, where
/// `Z_t = ∫_0^t e^{-θ(t-s)} Y_s ds` and `V_t = ∫_0^t e^{-θ(t-s)} dB^H_s`.
/// The pair `(Y, Z)` is Gaussian and Markov, so it is stepped exactly from
/// node to node. `V` is the fOU recursion on a sub-grid of `refinement`
/// steps per cell.
#[derive(Debug, Clone)]
pub struct TfeSampler {
    params: TfeSystemParams,
    grid: SamplingGrid,
    refinement: usize,
    step: Transition,
    fgn: Option<FgnSampler>,
}

#[derive(Debug, Clone, Copy)]
struct Transition {
    decay_y: f64,
    decay_z: f64,
    gain: f64,
    // lower Cholesky factor of the innovation covariance
    l11: f64,
    l21: f64,
    l22: f64,
}

/// `(1 - e^{-c h}) / c`, continuous at `c = 0`.
fn em1(c: f64, h: f64) -> f64 {
    if (c * h).abs() < 1e-12 {
        h
    } else {
        -(-c * h).exp_m1() / c
    }
}

/// `g(r) = (e^{-θr} - e^{-ar}) / (a - θ)`, the response of `Z` to `Y_0`.
fn response(a: f64, theta: f64, r: f64) -> f64 {
    (-theta * r).exp() * em1(a - theta, r)
}

fn simpson(f: impl Fn(f64) -> f64, h: f64, panels: usize) -> f64 {
    let n = 2 * panels;
    let dx = h / n as f64;
    let mut acc = f(0.0) + f(h);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * dx);
    }
    acc * dx / 3.0
}

impl Transition {
    fn new(theta: f64, epsilon: f64, h: f64) -> Self {
        let a = 1.0 / epsilon;
        let b2 = 2.0 / epsilon;
        let (v11, v12, v22) = if a * h > 1.0 && a > 2.0 * theta.abs() {
            let d = a - theta;
            let e2a = em1(2.0 * a, h);
            let eat = em1(a + theta, h);
            let e2t = em1(2.0 * theta, h);
            (
                b2 * e2a,
                b2 * (eat - e2a) / d,
                b2 * (e2t - 2.0 * eat + e2a) / (d * d),
            )
        } else {
            let panels = 64 * ((a * h).max(theta.abs() * h).ceil() as usize).max(1);
            (
                b2 * em1(2.0 * a, h),
                b2 * simpson(|r| (-a * r).exp() * response(a, theta, r), h, panels),
                b2 * simpson(|r| response(a, theta, r).powi(2), h, panels),
            )
        };
        let l11 = v11.sqrt();
        let l21 = if l11 > 0.0 { v12 / l11 } else { 0.0 };
        let l22 = (v22 - l21 * l21).max(0.0).sqrt();
        Self {
            decay_y: (-a * h).exp(),
            decay_z: (-theta * h).exp(),
            gain: response(a, theta, h),
            l11,
            l21,
            l22,
        }
    }
}

impl TfeSampler {
    pub fn new(params: &TfeSystemParams, grid: &SamplingGrid, refinement: usize) -> Result<Self> {
        params.validate()?;
        if refinement == 0 {
            return Err(Error::invalid("refinement must be at least 1"));
        }
        let fgn = if params.eta > 0.0 {
            let h = grid.delta() / refinement as f64;
            Some(FgnSampler::new(params.hurst, h, grid.count() * refinement)?)
        } else {
            None
        };
        Ok(Self {
            params: *params,
            grid: *grid,
            refinement,
            step: Transition::new(params.theta, params.epsilon, grid.delta()),
            fgn,
        })
    }

    /// Draws a path from `(x0, y0)`; `y0 = None` draws the fast start from its
    /// invariant law `N(0, 1)`.
    pub fn sample(&self, seed: SeedSpec, x0: f64, y0: Option<f64>) -> TfeSystemSample {
        let n = self.grid.count();
        let mut brownian = seed.rng(NoiseStream::Brownian);
        let mut y = y0.unwrap_or_else(|| brownian.sample(StandardNormal));
        let mut z = 0.0;
        let mut fast = Vec::with_capacity(n + 1);
        let mut zs = Vec::with_capacity(n + 1);
        fast.push(y);
        zs.push(z);
        let t = self.step;
        for _ in 0..n {
            let g1: f64 = brownian.sample(StandardNormal);
            let g2: f64 = brownian.sample(StandardNormal);
            let y_next = t.decay_y * y + t.l11 * g1;
            z = t.decay_z * z + t.gain * y + t.l21 * g1 + t.l22 * g2;
            y = y_next;
            fast.push(y);
            zs.push(z);
        }

        let frac: Option<Vec<f64>> = self.fgn.as_ref().map(|fgn| {
            let inc = fgn.sample(&mut seed.rng(NoiseStream::Fractional));
            let h = self.grid.delta() / self.refinement as f64;
            let v = fou_recursion(self.params.theta, 1.0, 0.0, &inc, h);
            v.into_iter().step_by(self.refinement).collect()
        });
        let root_eta = self.params.eta.sqrt();
        let theta = self.params.theta;
        let slow: Vec<f64> = (0..=n)
            .map(|k| {
                let mut x = x0 * (-theta * self.grid.time(k)).exp() + zs[k];
                if let Some(v) = &frac {
                    x += root_eta * v[k];
                }
                x
            })
            .collect();
        let build = |v: Vec<f64>| Trajectory::new(self.grid, v).expect("sampler output is finite");
        TfeSystemSample {
            grid: self.grid,
            slow: build(slow),
            fast: build(fast),
            params: self.params,
        }
    }
}

/// One draw of the averaging system with 16 fractional sub-steps per cell.
pub fn sample_tfe_system(
    params: &TfeSystemParams,
    grid: &SamplingGrid,
    seed: SeedSpec,
    x0: f64,
    y0: Option<f64>,
) -> Result<TfeSystemSample> {
    Ok(TfeSampler::new(params, grid, 16)?.sample(seed, x0, y0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_matches_quadrature() {
        // straddle the switch between the two branches
        let (theta, eps) = (0.7, 0.1);
        for h in [0.099, 0.101, 0.5] {
            let a = 1.0 / eps;
            let b2 = 2.0 / eps;
            let t = Transition::new(theta, eps, h);
            let v12 = b2 * simpson(|r| (-a * r).exp() * response(a, theta, r), h, 4096);
            let v22 = b2 * simpson(|r| response(a, theta, r).powi(2), h, 4096);
            let l21 = v12 / t.l11;
            assert!((t.l21 - l21).abs() < 1e-9 * l21.abs(), "h={h}");
            assert!((t.l22 * t.l22 + t.l21 * t.l21 - v22).abs() < 1e-9 * v22, "h={h}");
        }
    }

    #[test]
    fn transition_covariance_by_monte_carlo() {
        // Var(Y_h) from Y_0 = 0 is 1 - e^{-2h/ε}
        let t = Transition::new(1.0, 0.5, 0.3);
        let want = -(-2.0 * 0.3 / 0.5f64).exp_m1();
        assert!((t.l11 * t.l11 - want).abs() < 1e-14);
    }

    #[test]
    fn zero_drift_keeps_mean() {
        let p = TfeSystemParams::new(0.0, 0.0, 0.01, 0.7).unwrap();
        let grid = SamplingGrid::with_count(0.1, 10).unwrap();
        let sampler = TfeSampler::new(&p, &grid, 4).unwrap();
        let reps = 2000;
        let mean: f64 = (0..reps)
            .map(|r| *sampler.sample(SeedSpec::new(2, r), 1.0, None).slow.values().last().unwrap())
            .sum::<f64>()
            / reps as f64;
        // Var(∫Y) ≈ 2εT
        let se = (2.0 * 0.01 * 1.0 / reps as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn deterministic_and_averaging() {
        let grid = SamplingGrid::with_count(0.01, 100).unwrap();
        let p = TfeSystemParams::new(1.0, 1e-3, 1e-4, 0.7).unwrap();
        let a = sample_tfe_system(&p, &grid, SeedSpec::new(1, 1), 1.0, Some(0.0)).unwrap();
        let b = sample_tfe_system(&p, &grid, SeedSpec::new(1, 1), 1.0, Some(0.0)).unwrap();
        assert_eq!(a, b);
        let sup = a
            .slow
            .values()
            .iter()
            .enumerate()
            .map(|(k, x)| (x - (-grid.time(k)).exp()).abs())
            .fold(0.0, f64::max);
        assert!(sup < 0.2, "{sup}");
    }
}
