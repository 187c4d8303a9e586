use serde::{Deserialize, Serialize};

use super::{check_hurst, make_grid, SamplingGrid};
use crate::{Error, Result};

/// Parameters of `dX = -theta X dt + sigma dB^H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FouParams {
    pub theta: f64,
    pub sigma: f64,
    pub hurst: f64,
}

impl FouParams {
    pub fn new(theta: f64, sigma: f64, hurst: f64) -> Result<Self> {
        let p = Self { theta, sigma, hurst };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && self.theta >= 0.0) {
            return Err(Error::invalid(format!("theta must be >= 0, got {}", self.theta)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be > 0, got {}", self.sigma)));
        }
        check_hurst(self.hurst)
    }
}

/// Physical fBM system with scale separation `epsilon`, observed at
/// `delta = epsilon^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiscaleParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub hurst: f64,
}

impl MultiscaleParams {
    pub fn new(epsilon: f64, alpha: f64, sigma: f64, hurst: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            alpha,
            sigma,
            hurst,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be > 0, got {}", self.sigma)));
        }
        check_hurst(self.hurst)
    }

    pub fn delta(&self) -> f64 {
        self.epsilon.powf(self.alpha)
    }

    pub fn grid(&self, horizon: f64) -> Result<SamplingGrid> {
        make_grid(self.delta(), horizon)
    }
}

/// Slow/fast system with linear slow drift, an OU fast process and a
/// fractional perturbation of intensity `eta` on the slow line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfeSystemParams {
    pub theta: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub hurst: f64,
}

impl TfeSystemParams {
    pub fn new(theta: f64, eta: f64, epsilon: f64, hurst: f64) -> Result<Self> {
        let p = Self {
            theta,
            eta,
            epsilon,
            hurst,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta must be finite"));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::invalid(format!("eta must be >= 0, got {}", self.eta)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.hurst > 0.5 && self.hurst < 1.0) {
            return Err(Error::invalid(format!(
                "the fractional perturbation needs H in (1/2, 1), got {}",
                self.hurst
            )));
        }
        Ok(())
    }
}
