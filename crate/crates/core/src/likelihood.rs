//! Exact likelihood of the piecewise-linear-driven fOU model, used as an
//! approximate likelihood for fOU observations.
//!
//! With `Δ_θ x_k = x_k − e^{-θδ} x_{k-1}` and `φ = (1 − e^{-θδ})/(θδ)`,
//! `ℓ(θ, σ) = −q(θ) / (2σ²φ²) − N log(σφ)`, `q(θ) = Δ_θxᵀ Σ⁻¹ Δ_θx`.
//! Writing `Δ_θx = Δx + κ S₋₁x` with `κ = 1 − e^{-θδ}` makes `q` a quadratic
//! in `κ` whose three coefficients are computed once per data set.

use serde::Serialize;

use crate::covariance::FgnCovariance;
use crate::domain::Trajectory;
use crate::optimize::minimize_scalar;
use crate::{Error, Result};

/// Data, known Hurst index and cached whitened transforms.
#[derive(Debug, Clone)]
pub struct LikelihoodContext {
    data: Trajectory,
    hurst: f64,
    cov: FgnCovariance,
    // L⁻¹Δx and L⁻¹S₋₁x
    white_dx: Vec<f64>,
    white_prev: Vec<f64>,
    // ΔxᵀΣ⁻¹Δx, ΔxᵀΣ⁻¹S₋₁x, S₋₁xᵀΣ⁻¹S₋₁x
    q_xx: f64,
    q_xs: f64,
    q_ss: f64,
}

/// `φ(x) = (1 − e^{-x})/x` and its derivative in `x`. A power series is used
/// for `|x| < 0.5`, where the closed forms cancel.
pub fn phi_and_derivative(x: f64) -> (f64, f64) {
    if x.abs() < 0.5 {
        // φ = Σ (−x)^n/(n+1)!,  φ' = Σ n (−1)^n x^{n−1}/(n+1)!
        let mut phi = 0.0;
        let mut dphi = 0.0;
        let mut pow = 1.0; // (−x)^n
        let mut fact = 1.0; // (n+1)!
        for n in 0..30 {
            fact *= (n + 1) as f64;
            phi += pow / fact;
            if n >= 1 {
                // n (−1)^n x^{n−1} = −n (−x)^{n−1}
                dphi += -(n as f64) * (pow / -x) / fact;
            }
            pow *= -x;
        }
        if x == 0.0 {
            dphi = -0.5;
        }
        (phi, dphi)
    } else {
        let e = (-x).exp();
        ((1.0 - e) / x, (e * (1.0 + x) - 1.0) / (x * x))
    }
}

/// Terms of the small-`δ` expansion `ℓ = ℓ₀/δ + ℓ₁ + O(δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionTerms {
    pub ell0: f64,
    pub ell1: f64,
    pub residual: f64,
}

/// Profile maximum-likelihood estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MleEstimate {
    pub theta: f64,
    pub sigma: f64,
    pub log_likelihood: f64,
}

/// Scores of `δ ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Score {
    pub theta: f64,
    pub sigma: f64,
}

impl LikelihoodContext {
    pub fn new(data: Trajectory, hurst: f64) -> Result<Self> {
        let grid = *data.grid();
        let cov = FgnCovariance::new(hurst, grid.delta(), grid.count())?;
        Self::with_covariance(data, cov)
    }

    /// Reuses a factorization built for the data grid.
    pub fn with_covariance(data: Trajectory, cov: FgnCovariance) -> Result<Self> {
        let grid = *data.grid();
        if cov.size() != grid.count() || cov.delta() != grid.delta() {
            return Err(Error::invalid(format!(
                "covariance (N = {}, δ = {}) does not match the data grid (N = {}, δ = {})",
                cov.size(),
                cov.delta(),
                grid.count(),
                grid.delta()
            )));
        }
        let x = data.values();
        let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let prev = &x[..x.len() - 1];
        let white_dx = cov.whiten(&dx)?;
        let white_prev = cov.whiten(prev)?;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
        Ok(Self {
            hurst: cov.hurst(),
            q_xx: dot(&white_dx, &white_dx),
            q_xs: dot(&white_dx, &white_prev),
            q_ss: dot(&white_prev, &white_prev),
            data,
            cov,
            white_dx,
            white_prev,
        })
    }

    pub fn data(&self) -> &Trajectory {
        &self.data
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn covariance(&self) -> &FgnCovariance {
        &self.cov
    }

    fn n(&self) -> f64 {
        self.data.grid().count() as f64
    }

    fn delta(&self) -> f64 {
        self.data.grid().delta()
    }

    fn kappa(&self, theta: f64) -> f64 {
        -(-theta * self.delta()).exp_m1()
    }

    /// `q(θ) = Δ_θxᵀ Σ⁻¹ Δ_θx`.
    pub fn residual_quadratic(&self, theta: f64) -> f64 {
        let k = self.kappa(theta);
        self.q_xx + 2.0 * k * self.q_xs + k * k * self.q_ss
    }

    /// `L⁻¹ Δ_θx / (σφ)`: i.i.d. standard normal under the model.
    pub fn whitened_residual(&self, theta: f64, sigma: f64) -> Result<Vec<f64>> {
        check_sigma(sigma)?;
        let k = self.kappa(theta);
        let (phi, _) = phi_and_derivative(theta * self.delta());
        let s = sigma * phi;
        Ok(self
            .white_dx
            .iter()
            .zip(&self.white_prev)
            .map(|(a, b)| (a + k * b) / s)
            .collect())
    }

    pub fn log_likelihood(&self, theta: f64, sigma: f64) -> Result<f64> {
        check_sigma(sigma)?;
        let (phi, _) = phi_and_derivative(theta * self.delta());
        let q = self.residual_quadratic(theta);
        Ok(-q / (2.0 * sigma * sigma * phi * phi) - self.n() * (sigma * phi).ln())
    }

    /// `(∂_θ, ∂_σ)` of `δ ℓ`.
    pub fn score(&self, theta: f64, sigma: f64) -> Result<Score> {
        check_sigma(sigma)?;
        let delta = self.delta();
        let n = self.n();
        let (phi, dphi_dx) = phi_and_derivative(theta * delta);
        // derivative in θ
        let dphi = delta * dphi_dx;
        let k = self.kappa(theta);
        let q = self.residual_quadratic(theta);
        let s2 = sigma * sigma;
        // (∂_θ Δ_θx)ᵀ Σ⁻¹ Δ_θx with ∂_θ Δ_θx = δ e^{-θδ} S₋₁x
        let cross = delta * (-theta * delta).exp() * (self.q_xs + k * self.q_ss);
        let theta_score = delta * dphi * q / (s2 * phi.powi(3))
            - delta * n * dphi / phi
            - delta / (2.0 * s2 * phi * phi) * cross
            - delta / (2.0 * s2 * phi * phi) * cross;
        let sigma_score = delta * (q / (s2 * sigma * phi * phi) - n / sigma);
        Ok(Score {
            theta: theta_score,
            sigma: sigma_score,
        })
    }

    /// `ℓ₀ = −T/(2σ²N) ΔxᵀΣ⁻¹Δx − T log σ` and
    /// `ℓ₁ = −θT/(2σ²) (ΔxᵀΣ⁻¹Δx/N + 2ΔxᵀΣ⁻¹S₋₁x/N + θT S₋₁xᵀΣ⁻¹S₋₁x/N² − σ²)`.
    pub fn expansion_terms(&self, theta: f64, sigma: f64) -> Result<ExpansionTerms> {
        let ell = self.log_likelihood(theta, sigma)?;
        let n = self.n();
        let t = self.data.grid().horizon();
        let s2 = sigma * sigma;
        let ell0 = -t / (2.0 * s2 * n) * self.q_xx - t * sigma.ln();
        let ell1 = -theta * t / (2.0 * s2)
            * (self.q_xx / n + 2.0 * self.q_xs / n + theta * t * self.q_ss / (n * n) - s2);
        Ok(ExpansionTerms {
            ell0,
            ell1,
            residual: ell - ell0 / self.delta() - ell1,
        })
    }

    /// `σ̂²(θ) = q(θ) / (N φ²)`, the maximizer in `σ` at fixed `θ`.
    pub fn profile_sigma2(&self, theta: f64) -> f64 {
        let (phi, _) = phi_and_derivative(theta * self.delta());
        self.residual_quadratic(theta) / (self.n() * phi * phi)
    }

    /// Maximizes the profiled likelihood over `θ ∈ [lo, hi]`.
    pub fn profile_mle(&self, lo: f64, hi: f64) -> Result<MleEstimate> {
        if self.q_xx == 0.0 {
            return Err(Error::EstimationFailure("all increments are zero".into()));
        }
        // The profiled likelihood is −N/2 − (N/2) log(q(θ)/N), so it is
        // maximized by minimizing q itself. Searching on q keeps θ̂ exactly
        // invariant under power-of-two rescaling of the data.
        let (theta, q) = minimize_scalar(|theta| self.residual_quadratic(theta), lo, hi)?;
        if !(q > 0.0) {
            return Err(Error::EstimationFailure(format!(
                "the residual vanishes at θ = {theta}; the data are degenerate"
            )));
        }
        let sigma = self.profile_sigma2(theta).sqrt();
        Ok(MleEstimate {
            theta,
            sigma,
            log_likelihood: self.log_likelihood(theta, sigma)?,
        })
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
    }
    Ok(())
}

/// Convenience wrapper: builds the context and maximizes.
pub fn profile_mle(data: &Trajectory, hurst: f64, lo: f64, hi: f64) -> Result<MleEstimate> {
    LikelihoodContext::new(data.clone(), hurst)?.profile_mle(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::quadratic_form;
    use crate::domain::{FouParams, SamplingGrid, SeedSpec};
    use crate::inverse::sample_approximate_fou;
    use approx::assert_relative_eq;

    fn data(theta: f64, h: f64, n: usize, delta: f64, seed: u64) -> Trajectory {
        let p = FouParams::new(theta, 1.0, h).unwrap();
        let grid = SamplingGrid::with_count(delta, n).unwrap();
        sample_approximate_fou(&p, &grid, SeedSpec::new(seed, 0), 10.0).unwrap()
    }

    #[test]
    fn phi_series_matches_closed_form() {
        for x in [0.49f64, 0.3, 0.1, 1e-3, -0.2] {
            let (p, d) = phi_and_derivative(x);
            let e = (-x).exp();
            assert_relative_eq!(p, (1.0 - e) / x, max_relative = 1e-12);
            assert_relative_eq!(d, (e * (1.0 + x) - 1.0) / (x * x), max_relative = 1e-7);
        }
        let (lo, dlo) = phi_and_derivative(0.4999999);
        let (hi, dhi) = phi_and_derivative(0.5);
        assert_relative_eq!(lo, hi, max_relative = 1e-6);
        assert_relative_eq!(dlo, dhi, max_relative = 1e-6);
        assert_eq!(phi_and_derivative(0.0), (1.0, -0.5));
    }

    #[test]
    fn single_cell_example() {
        for h in [0.3, 0.7] {
            let grid = SamplingGrid::with_count(1.0, 1).unwrap();
            let x = Trajectory::new(grid, vec![0.0, 1.0]).unwrap();
            let ctx = LikelihoodContext::new(x, h).unwrap();
            assert_relative_eq!(ctx.log_likelihood(0.0, 1.0).unwrap(), -0.5, epsilon = 1e-15);
            assert!(ctx.log_likelihood(0.0, 0.0).is_err());
        }
    }

    #[test]
    fn direct_quadratic_form_agrees() {
        let x = data(1.0, 0.7, 60, 0.05, 3);
        let ctx = LikelihoodContext::new(x.clone(), 0.7).unwrap();
        for theta in [0.0, 0.4, 2.5] {
            let decay = (-theta * 0.05f64).exp();
            let r: Vec<f64> = x.values().windows(2).map(|w| w[1] - decay * w[0]).collect();
            let q = quadratic_form(ctx.covariance(), &r, &r).unwrap();
            assert_relative_eq!(ctx.residual_quadratic(theta), q, max_relative = 1e-10);
            let w = ctx.whitened_residual(theta, 1.3).unwrap();
            let (phi, _) = phi_and_derivative(theta * 0.05);
            let recomposed = -0.5 * w.iter().map(|v| v * v).sum::<f64>() - 60.0 * (1.3 * phi).ln();
            assert_relative_eq!(ctx.log_likelihood(theta, 1.3).unwrap(), recomposed, max_relative = 1e-10);
        }
    }

    #[test]
    fn zero_theta_expansion_is_exact() {
        let x = data(1.0, 0.3, 40, 0.1, 5);
        let ctx = LikelihoodContext::new(x, 0.3).unwrap();
        let e = ctx.expansion_terms(0.0, 0.8).unwrap();
        assert_eq!(e.ell1, 0.0);
        assert!(e.residual.abs() < 1e-9 * e.ell0.abs() / 0.1);
        let e2 = ctx.expansion_terms(1.7, 0.8).unwrap();
        assert_eq!(e.ell0, e2.ell0);
    }

    #[test]
    fn profile_sigma_zeroes_sigma_score() {
        let x = data(1.0, 0.7, 80, 0.05, 9);
        let ctx = LikelihoodContext::new(x, 0.7).unwrap();
        for theta in [0.3, 1.0, 3.0] {
            let s = ctx.profile_sigma2(theta).sqrt();
            assert!(ctx.score(theta, s).unwrap().sigma.abs() < 1e-12);
            let best = ctx.log_likelihood(theta, s).unwrap();
            for f in [0.5, 0.9, 1.1, 2.0] {
                assert!(ctx.log_likelihood(theta, s * f).unwrap() <= best);
            }
        }
    }

    #[test]
    fn mle_matches_closed_form_minimizer() {
        // q is quadratic in κ, so the profile maximizer is κ* = −q_xs/q_ss
        let x = data(1.0, 0.7, 200, 0.05, 2);
        let ctx = LikelihoodContext::new(x, 0.7).unwrap();
        let est = ctx.profile_mle(0.0, 10.0).unwrap();
        let kappa = -ctx.q_xs / ctx.q_ss;
        let theta = -(1.0 - kappa).ln() / 0.05;
        assert!((est.theta - theta).abs() < 1e-6, "{} vs {theta}", est.theta);
    }

    #[test]
    fn mle_scale_equivariance() {
        let x = data(1.0, 0.7, 100, 0.05, 4);
        let a = profile_mle(&x, 0.7, 0.0, 10.0).unwrap();
        let b = profile_mle(&x.affine(0.0, 4.0).unwrap(), 0.7, 0.0, 10.0).unwrap();
        assert_eq!(a.theta, b.theta);
        assert_relative_eq!(b.sigma, 4.0 * a.sigma, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_data_fails() {
        let grid = SamplingGrid::with_count(0.1, 5).unwrap();
        let x = Trajectory::new(grid, vec![0.0; 6]).unwrap();
        assert!(matches!(profile_mle(&x, 0.7, 0.0, 5.0), Err(Error::EstimationFailure(_))));
    }
}
