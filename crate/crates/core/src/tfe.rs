//! Drift estimation for the slow component of a two-time-scale system by
//! least-squares fit to the averaged trajectory `x0 e^{-θt}`.

use serde::{Deserialize, Serialize};

use crate::domain::{SamplingGrid, Trajectory};
use crate::optimize::minimize_scalar;
use crate::{Error, Result};

/// Search bounds and initial condition for one drift fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfeInstance {
    pub x0: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl TfeInstance {
    pub fn new(x0: f64, theta_lo: f64, theta_hi: f64) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Error::invalid("x0 must be finite"));
        }
        if !(theta_lo > 0.0 && theta_hi > theta_lo && theta_hi.is_finite()) {
            return Err(Error::invalid(format!(
                "need 0 < theta_lo < theta_hi, got [{theta_lo}, {theta_hi}]"
            )));
        }
        Ok(Self {
            x0,
            theta_lo,
            theta_hi,
        })
    }
}

/// `x0 e^{-θ t_k}` on the grid.
pub fn averaged_trajectory(theta: f64, x0: f64, grid: &SamplingGrid) -> Result<Trajectory> {
    Trajectory::new(*grid, grid.times().map(|t| x0 * (-theta * t).exp()).collect())
}

/// `Σ_{k>=1} (x_k − x0 e^{-θ t_k})²`; the initial sample carries no information.
pub fn tfe_loss(theta: f64, data: &Trajectory, x0: f64) -> f64 {
    let grid = data.grid();
    data.values()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, x)| {
            let r = x - x0 * (-theta * grid.time(k)).exp();
            r * r
        })
        .sum()
}

/// Minimizer of [`tfe_loss`] over the instance bounds.
pub fn tfe_estimate(data: &Trajectory, instance: &TfeInstance) -> Result<f64> {
    if data.grid().count() == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if instance.x0 == 0.0 {
        // the model curve is identically zero and carries no θ
        return Err(Error::EstimationFailure(
            "loss is flat in theta because x0 = 0".into(),
        ));
    }
    let (theta, _) = minimize_scalar(
        |th| tfe_loss(th, data, instance.x0),
        instance.theta_lo,
        instance.theta_hi,
    )?;
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_observation_loss() {
        let grid = SamplingGrid::with_count(1.0, 1).unwrap();
        let x = Trajectory::new(grid, vec![1.0, (-1.0f64).exp()]).unwrap();
        assert!(tfe_loss(1.0, &x, 1.0).abs() < 1e-30);
        let inst = TfeInstance::new(1.0, 0.1, 5.0).unwrap();
        assert!((tfe_estimate(&x, &inst).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn exact_recovery() {
        let grid = SamplingGrid::with_count(0.01, 100).unwrap();
        let inst = TfeInstance::new(1.5, 0.01, 10.0).unwrap();
        for theta in [0.2, 1.0, 3.7] {
            let x = averaged_trajectory(theta, inst.x0, &grid).unwrap();
            assert!((tfe_estimate(&x, &inst).unwrap() - theta).abs() < 1e-7);
        }
    }

    #[test]
    fn flat_loss_fails() {
        let grid = SamplingGrid::with_count(0.1, 10).unwrap();
        let x = Trajectory::new(grid, vec![0.0; 11]).unwrap();
        let inst = TfeInstance::new(0.0, 0.1, 2.0).unwrap();
        assert!(matches!(tfe_estimate(&x, &inst), Err(Error::EstimationFailure(_))));
    }
}
