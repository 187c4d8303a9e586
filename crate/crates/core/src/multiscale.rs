//! Estimators of `σ²` and `H` for subsampled observations of the physical
//! fBM, the bias of `σ̂²` at `H = 1/2`, and the admissible subsampling
//! exponents.

use serde::{Deserialize, Serialize};

use crate::covariance::{quadratic_form, FgnCovariance};
use crate::domain::{check_hurst, increments, make_grid, second_order_increments, SamplingGrid, Trajectory};
use crate::{Error, Result};

/// `δ = ε^α` for a sequence of `ε` at a fixed horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsamplingSchedule {
    pub epsilons: Vec<f64>,
    pub alpha: f64,
    pub horizon: f64,
}

impl SubsamplingSchedule {
    pub fn new(epsilons: Vec<f64>, alpha: f64, horizon: f64) -> Result<Self> {
        if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::invalid("every epsilon must lie in (0, 1)"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid(format!("horizon must be > 0, got {horizon}")));
        }
        Ok(Self {
            epsilons,
            alpha,
            horizon,
        })
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.epsilons.iter().map(|e| e.powf(self.alpha)).collect()
    }

    /// One grid per `ε`, with `N = round(T/δ)`.
    pub fn grids(&self) -> Result<Vec<SamplingGrid>> {
        self.deltas().into_iter().map(|d| make_grid(d, self.horizon)).collect()
    }
}

/// `σ̂² = (1/N) Δxᵀ Σ⁻¹ Δx` with `Σ` the fGn covariance on the data grid.
pub fn sigma2_hat(x: &Trajectory, hurst: f64) -> Result<f64> {
    let grid = x.grid();
    let cov = FgnCovariance::new(hurst, grid.delta(), grid.count())?;
    sigma2_hat_with(&cov, x)
}

/// [`sigma2_hat`] with a prebuilt covariance.
pub fn sigma2_hat_with(cov: &FgnCovariance, x: &Trajectory) -> Result<f64> {
    let dx = increments(x);
    if cov.delta() != x.grid().delta() {
        return Err(Error::invalid("covariance step does not match the data grid"));
    }
    let q = quadratic_form(cov, dx.as_slice(), dx.as_slice())?;
    Ok(q / dx.len() as f64)
}

/// Second-variation estimator of `H` from a trajectory sampled at `δ/2`
/// (`2N` cells):
/// `Ĥ = 1/2 − log(S_{δ/2} / S_δ) / (2 log 2)` with `S_h` the sum of squared
/// second differences at step `h`. The coarse sum uses every other sample.
pub fn hurst_hat(x_fine: &Trajectory) -> Result<f64> {
    let cells = x_fine.grid().count();
    if cells < 4 || cells % 2 != 0 {
        return Err(Error::invalid(format!(
            "the fine trajectory needs an even number of cells >= 4, got {cells}"
        )));
    }
    let fine: f64 = second_order_increments(x_fine)?.iter().map(|v| v * v).sum();
    let coarse: f64 = second_order_increments(&x_fine.subsample(2)?)?
        .iter()
        .map(|v| v * v)
        .sum();
    if !(fine > 0.0 && coarse > 0.0) {
        return Err(Error::DegenerateData(
            "second differences vanish; the trajectory is affine".into(),
        ));
    }
    Ok(0.5 - (fine / coarse).ln() / (2.0 * std::f64::consts::LN_2))
}

/// `E σ̂² = σ² (1 + (ε/δ)(e^{-δ/ε} − 1))` for the physical Brownian motion.
pub fn expected_bias_h_half(sigma: f64, epsilon: f64, delta: f64) -> Result<f64> {
    if !(sigma > 0.0 && epsilon > 0.0 && delta > 0.0) {
        return Err(Error::invalid("sigma, epsilon and delta must be positive"));
    }
    let r = epsilon / delta;
    Ok(sigma * sigma * (1.0 + r * (-1.0 / r).exp_m1()))
}

/// Which limit theorem the subsampling exponent has to serve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Consistency,
    Clt,
}

/// Open interval of admissible `α` in `δ = ε^α`.
pub fn admissible_alpha(hurst: f64, regime: Regime) -> Result<(f64, f64)> {
    check_hurst(hurst)?;
    let upper = match regime {
        Regime::Consistency => (hurst / (1.0 - hurst)).min(1.0),
        Regime::Clt => (hurst / (0.5 + hurst)).min(hurst / (1.5 - hurst)),
    };
    Ok((0.0, upper))
}

/// Exponent `r` of the L² error bound `‖σ̂² − σ²‖ ≲ ε^r` at `δ = ε^α`: the
/// smallest exponent among the three terms of the bound for the given `H`.
pub fn predicted_rate(hurst: f64, alpha: f64) -> Result<f64> {
    check_hurst(hurst)?;
    let stat = alpha / 2.0;
    Ok(if hurst >= 0.5 {
        (hurst * (1.0 - alpha)).min(2.0 * hurst * (1.0 - alpha)).min(stat)
    } else {
        (2.0 * hurst - alpha).min(hurst - alpha * (1.0 - hurst)).min(stat)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bias_examples() {
        assert_relative_eq!(expected_bias_h_half(1.0, 0.1, 1.0).unwrap(), 0.900005, epsilon = 5e-7);
        assert_relative_eq!(expected_bias_h_half(1.0, 1.0, 1.0).unwrap(), 0.367879, epsilon = 5e-7);
        assert_relative_eq!(expected_bias_h_half(1.0, 10.0, 1.0).unwrap(), 0.048374, epsilon = 5e-7);
        assert_relative_eq!(expected_bias_h_half(2.0, 1e-9, 1.0).unwrap(), 4.0, max_relative = 1e-8);
    }

    #[test]
    fn alpha_ranges() {
        assert_eq!(admissible_alpha(0.5, Regime::Consistency).unwrap(), (0.0, 1.0));
        let (_, u) = admissible_alpha(0.25, Regime::Consistency).unwrap();
        assert_relative_eq!(u, 1.0 / 3.0, max_relative = 1e-15);
        let (_, u) = admissible_alpha(0.75, Regime::Clt).unwrap();
        assert_relative_eq!(u, 0.6, max_relative = 1e-15);
        assert_relative_eq!(predicted_rate(0.7, 0.5).unwrap(), 0.25);
    }

    #[test]
    fn hurst_on_affine_paths_is_degenerate() {
        let grid = SamplingGrid::with_count(0.1, 8).unwrap();
        let x = Trajectory::new(grid, (0..9).map(|k| 2.0 + 0.5 * k as f64).collect()).unwrap();
        assert!(matches!(hurst_hat(&x), Err(Error::DegenerateData(_))));
        let odd = Trajectory::new(SamplingGrid::with_count(0.1, 7).unwrap(), vec![0.0; 8]).unwrap();
        assert!(hurst_hat(&odd).is_err());
    }

    #[test]
    fn sigma_at_half_is_realized_variance() {
        let grid = SamplingGrid::with_count(0.25, 4).unwrap();
        let x = Trajectory::new(grid, vec![0.0, 0.5, 0.0, 1.0, 1.5]).unwrap();
        let rv = (0.25 + 0.25 + 1.0 + 0.25) / 1.0;
        assert_relative_eq!(sigma2_hat(&x, 0.5).unwrap(), rv, max_relative = 1e-14);
        let scaled = x.affine(3.0, -2.0).unwrap();
        assert_relative_eq!(sigma2_hat(&scaled, 0.5).unwrap(), 4.0 * rv, max_relative = 1e-14);
    }
}
