use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use nalgebra::{DMatrix, DVector};

use crate::covariance::{toeplitz, unit_autocovariance, FgnCovariance};
use crate::domain::{check_hurst, IncrementVector, NoiseStream, SamplingGrid, SeedSpec, Trajectory};
use crate::{Error, Result};

/// Sizes above this use circulant embedding under [`FgnMethod::Auto`].
pub const CIRCULANT_THRESHOLD: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FgnMethod {
    /// Independent draws at H = 1/2, Cholesky up to [`CIRCULANT_THRESHOLD`],
    /// circulant embedding above.
    #[default]
    Auto,
    Cholesky,
    Circulant,
}

/// Exact sampler for `N` consecutive fGn increments of step `delta`.
#[derive(Clone)]
pub struct FgnSampler {
    hurst: f64,
    delta: f64,
    size: usize,
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    White(f64),
    Cholesky(FgnCovariance),
    // lower Cholesky factor of a general Toeplitz covariance
    Dense(DMatrix<f64>),
    Circulant {
        // sqrt(λ_j / m) for the eigenvalues of the embedding circulant
        scale: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
}

impl std::fmt::Debug for FgnSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            Kind::White(_) => "white",
            Kind::Cholesky(_) | Kind::Dense(_) => "cholesky",
            Kind::Circulant { .. } => "circulant",
        };
        f.debug_struct("FgnSampler")
            .field("hurst", &self.hurst)
            .field("delta", &self.delta)
            .field("size", &self.size)
            .field("kind", &kind)
            .finish()
    }
}

impl FgnSampler {
    pub fn new(hurst: f64, delta: f64, size: usize) -> Result<Self> {
        Self::with_method(hurst, delta, size, FgnMethod::Auto)
    }

    pub fn with_method(hurst: f64, delta: f64, size: usize, method: FgnMethod) -> Result<Self> {
        check_hurst(hurst)?;
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {delta}")));
        }
        if size == 0 {
            return Err(Error::invalid("fGn sample size must be at least 1"));
        }
        let kind = match method {
            FgnMethod::Auto if hurst == 0.5 => Kind::White(delta.sqrt()),
            FgnMethod::Auto if size <= CIRCULANT_THRESHOLD => {
                Kind::Cholesky(FgnCovariance::new(hurst, delta, size)?)
            }
            FgnMethod::Cholesky => Kind::Cholesky(FgnCovariance::new(hurst, delta, size)?),
            FgnMethod::Auto | FgnMethod::Circulant => circulant(hurst, delta, size)?,
        };
        Ok(Self {
            hurst,
            delta,
            size,
            kind,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// One draw of the increment vector.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.kind.draw(self.size, rng)
    }
}

impl Kind {
    fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        match self {
            Kind::White(scale) => (0..n).map(|_| scale * normal(rng)).collect(),
            Kind::Cholesky(cov) => {
                let w: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
                cov.color(&w).expect("length matches by construction")
            }
            Kind::Dense(l) => {
                let w = DVector::from_fn(n, |_, _| normal(rng));
                (l * w).iter().copied().collect()
            }
            Kind::Circulant { scale, fft } => {
                let mut buf: Vec<Complex<f64>> = scale
                    .iter()
                    .map(|s| {
                        let re = normal(rng);
                        let im = normal(rng);
                        Complex::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf.truncate(n);
                buf.into_iter().map(|z| z.re).collect()
            }
        }
    }
}

/// Exact sampler for `size` points of a stationary Gaussian sequence given
/// its autocovariance. Circulant embedding when the embedding is
/// nonnegative, dense Cholesky otherwise. Lags beyond the supplied slice
/// count as zero; pass [`embedding_lags`] of them for the usual embedding.
#[derive(Clone)]
pub struct ToeplitzSampler {
    size: usize,
    kind: Kind,
}

impl std::fmt::Debug for ToeplitzSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToeplitzSampler").field("size", &self.size).finish_non_exhaustive()
    }
}

impl ToeplitzSampler {
    pub fn new(size: usize, autocovariance: &[f64]) -> Result<Self> {
        if size == 0 || autocovariance.len() < size {
            return Err(Error::invalid("need at least `size` autocovariance lags"));
        }
        let head = &autocovariance[..size];
        let kind = if size <= CIRCULANT_THRESHOLD {
            dense(head)?
        } else {
            match circulant_from(size, |lag| autocovariance.get(lag).copied().unwrap_or(0.0)) {
                Ok(kind) => kind,
                Err(Error::NumericFailure(_)) => dense(head)?,
                Err(e) => return Err(e),
            }
        };
        Ok(Self { size, kind })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.kind.draw(self.size, rng)
    }
}

fn dense(autocovariance: &[f64]) -> Result<Kind> {
    let chol = nalgebra::Cholesky::new(toeplitz(autocovariance)).ok_or_else(|| {
        Error::NumericFailure("autocovariance is not positive definite".into())
    })?;
    Ok(Kind::Dense(chol.l()))
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn circulant(hurst: f64, delta: f64, size: usize) -> Result<Kind> {
    let var = delta.powf(2.0 * hurst);
    circulant_from(size, |lag| var * unit_autocovariance(hurst, lag))
}

/// Number of lags the circulant embedding of `size` points reads.
pub fn embedding_lags(size: usize) -> usize {
    (2 * size.saturating_sub(1)).max(2).next_power_of_two() / 2 + 1
}

fn circulant_from(size: usize, acov: impl Fn(usize) -> f64) -> Result<Kind> {
    let m = (2 * size.saturating_sub(1)).max(2).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let lag = if j <= m / 2 { j } else { m - j };
            Complex::new(acov(lag), 0.0)
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft.process(&mut buf);
    let largest = buf.iter().map(|z| z.re).fold(0.0, f64::max);
    let mut scale = Vec::with_capacity(m);
    for z in &buf {
        if z.re < -1e-10 * largest {
            return Err(Error::NumericFailure(format!(
                "circulant embedding of size {m} is not positive semi-definite (eigenvalue {:e})",
                z.re
            )));
        }
        scale.push((z.re.max(0.0) / m as f64).sqrt());
    }
    Ok(Kind::Circulant { scale, fft })
}

/// Exact fGn increments on `grid` from the fractional stream of `seed`.
pub fn sample_fgn(hurst: f64, grid: &SamplingGrid, seed: SeedSpec) -> Result<IncrementVector> {
    let sampler = FgnSampler::new(hurst, grid.delta(), grid.count())?;
    let deltas = sampler.sample(&mut seed.rng(NoiseStream::Fractional));
    IncrementVector::new(*grid, deltas)
}

/// fBM on `grid` started at zero; cumulative sum of [`sample_fgn`].
pub fn sample_fbm(hurst: f64, grid: &SamplingGrid, seed: SeedSpec) -> Result<Trajectory> {
    Trajectory::from_increments(0.0, &sample_fgn(hurst, grid, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::fgn_autocovariance;

    fn autocov(samples: &[Vec<f64>], lag: usize) -> f64 {
        let mut acc = 0.0;
        let mut count = 0usize;
        for s in samples {
            for i in 0..s.len() - lag {
                acc += s[i] * s[i + lag];
                count += 1;
            }
        }
        acc / count as f64
    }

    #[test]
    fn deterministic_given_seed() {
        let grid = SamplingGrid::with_count(0.01, 300).unwrap();
        let seed = SeedSpec::new(11, 2);
        let a = sample_fgn(0.7, &grid, seed).unwrap();
        let b = sample_fgn(0.7, &grid, seed).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        let c = sample_fgn(0.7, &grid, seed.with_replicate(3)).unwrap();
        assert_ne!(a.as_slice(), c.as_slice());
    }

    #[test]
    fn white_noise_variance() {
        let grid = SamplingGrid::with_count(0.5, 10_000).unwrap();
        let x = sample_fgn(0.5, &grid, SeedSpec::new(1, 0)).unwrap();
        let n = x.len() as f64;
        let v = x.as_slice().iter().map(|d| d * d / 0.5).sum::<f64>() / n;
        // Var of mean of χ²_1 is 2/n
        assert!((v - 1.0).abs() < 3.0 * (2.0 / n).sqrt(), "{v}");
    }

    #[test]
    fn lag_one_correlation() {
        let sampler = FgnSampler::new(0.75, 1.0, 200).unwrap();
        let mut rng = SeedSpec::new(5, 0).rng(NoiseStream::Fractional);
        let draws: Vec<Vec<f64>> = (0..200).map(|_| sampler.sample(&mut rng)).collect();
        let rho = autocov(&draws, 1) / autocov(&draws, 0);
        assert!((rho - 0.414214).abs() < 0.02, "{rho}");
    }

    #[test]
    fn circulant_matches_target_covariance() {
        for &(h, n) in &[(0.3, 64), (0.7, 64), (0.9, 33)] {
            let circ = FgnSampler::with_method(h, 0.1, n, FgnMethod::Circulant).unwrap();
            let mut rng = SeedSpec::new(9, 1).rng(NoiseStream::Fractional);
            let draws: Vec<Vec<f64>> = (0..4000).map(|_| circ.sample(&mut rng)).collect();
            for lag in [0, 1, 5] {
                let want = fgn_autocovariance(h, 0.1, lag).unwrap();
                let got = autocov(&draws, lag);
                let scale = fgn_autocovariance(h, 0.1, 0).unwrap();
                assert!((got - want).abs() < 0.03 * scale, "H={h} lag={lag}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn circulant_eigenvalues_are_exact_covariance() {
        // the embedding reproduces Σ exactly: E[x xᵀ] = Σ, so with the
        // spectral scale squared we recover γ via an inverse transform
        let h = 0.8;
        let n = 40;
        let Kind::Circulant { scale, .. } = circulant(h, 1.0, n).unwrap() else {
            unreachable!()
        };
        let m = scale.len();
        for lag in 0..n {
            let c: f64 = scale
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    s * s * (2.0 * std::f64::consts::PI * (j * lag) as f64 / m as f64).cos()
                })
                .sum();
            let want = fgn_autocovariance(h, 1.0, lag).unwrap();
            assert!((c - want).abs() < 1e-12, "lag {lag}: {c} vs {want}");
        }
    }

    #[test]
    fn fbm_starts_at_zero() {
        let grid = SamplingGrid::with_count(0.1, 10).unwrap();
        let b = sample_fbm(0.3, &grid, SeedSpec::new(0, 0)).unwrap();
        assert_eq!(b.values()[0], 0.0);
        assert_eq!(b.values().len(), 11);
    }
}
