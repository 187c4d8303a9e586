//! Trace statistics of shifted fGn Gram matrices.
//!
//! With unit-step covariances `Σ_N` and `Σ_{2N}` and the window `P_k` that
//! picks coordinates `k+1..=k+N` of a `2N` vector, `A_k = Σ_N⁻¹ P_k Σ_{2N} P_0ᵀ`.
//! The entries of `C_k = P_k Σ_{2N} P_0ᵀ` are `γ(k + i − j)`. Unit steps lose
//! nothing: every trace is invariant under `δ^{2H}` rescaling.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::covariance::{unit_autocovariance, FgnCovariance};
use crate::domain::{check_hurst, NoiseStream, SeedSpec};
use crate::simulation::FgnSampler;
use crate::stats::summarize;
use crate::{Error, Result};

/// `G^{k,0} = Σ_N⁻¹ C^{k,0}`.
#[derive(Debug, Clone)]
pub struct ShiftGram {
    pub hurst: f64,
    pub size: usize,
    pub shift: usize,
    pub matrix: DMatrix<f64>,
}

fn shifted_covariance(hurst: f64, n: usize, k: usize, l: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        let lag = (k + i) as i64 - (l + j) as i64;
        unit_autocovariance(hurst, lag.unsigned_abs() as usize)
    })
}

fn check_shift(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    if k > n {
        return Err(Error::invalid(format!("shift {k} exceeds N = {n}")));
    }
    Ok(())
}

/// Builds `G^{k,0}` by column-wise solves against `Σ_N`.
pub fn build_shift_gram(hurst: f64, n: usize, k: usize) -> Result<ShiftGram> {
    check_shift(n, k)?;
    let cov = FgnCovariance::new(hurst, 1.0, n)?;
    shift_gram_with(&cov, k, 0)
}

/// `Σ_N⁻¹ P_k Σ_{2N} P_lᵀ` for a general window pair.
pub fn shift_gram_with(cov: &FgnCovariance, k: usize, l: usize) -> Result<ShiftGram> {
    let n = cov.size();
    check_shift(n, k)?;
    check_shift(n, l)?;
    let c = shifted_covariance(cov.hurst(), n, k, l);
    Ok(ShiftGram {
        hurst: cov.hurst(),
        size: n,
        shift: k.abs_diff(l),
        matrix: cov.solve_matrix(&c)?,
    })
}

impl ShiftGram {
    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `Tr(G_self G_other)` without forming the product.
    pub fn trace_product(&self, other: &ShiftGram) -> f64 {
        let n = self.size;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * other.matrix[(j, i)];
            }
        }
        acc
    }
}

/// All traces for one `(H, N)`: `Tr(A_k)` for `k = 0..=N` and
/// `Tr(A_k A_l)` for `1 <= k <= l <= N`.
#[derive(Debug, Clone)]
pub struct TraceTable {
    pub hurst: f64,
    pub size: usize,
    pub traces: Vec<f64>,
    // row-major upper triangle over k, l in 1..=N
    products: Vec<f64>,
}

impl TraceTable {
    pub fn compute(hurst: f64, n: usize) -> Result<Self> {
        check_hurst(hurst)?;
        check_shift(n, 0)?;
        let cov = FgnCovariance::new(hurst, 1.0, n)?;
        let inv = cov.solve_matrix(&DMatrix::identity(n, n))?;
        // Tr(S C_k) = Σ_d w(d) γ(|k + d|), w(d) = Σ_{i−j=d} S_ij
        let mut diag_sums = vec![0.0; 2 * n - 1];
        for i in 0..n {
            for j in 0..n {
                diag_sums[i + n - 1 - j] += inv[(i, j)];
            }
        }
        let traces = (0..=n)
            .map(|k| {
                diag_sums
                    .iter()
                    .enumerate()
                    .map(|(idx, w)| {
                        let d = idx as i64 - (n as i64 - 1);
                        w * unit_autocovariance(hurst, (k as i64 + d).unsigned_abs() as usize)
                    })
                    .sum()
            })
            .collect();

        // M_k = S C_k, stored flat (column-major) together with its transpose
        let mut plain = Vec::with_capacity(n);
        let mut transposed = Vec::with_capacity(n);
        for k in 1..=n {
            let m = &inv * shifted_covariance(hurst, n, k, 0);
            transposed.push(m.transpose().as_slice().to_vec());
            plain.push(m.as_slice().to_vec());
        }
        let mut products = Vec::with_capacity(n * (n + 1) / 2);
        for a in 0..n {
            for b in a..n {
                // Tr(M_a M_b) = vec(M_a) · vec(M_bᵀ)
                products.push(plain[a].iter().zip(&transposed[b]).map(|(x, y)| x * y).sum());
            }
        }
        Ok(Self {
            hurst,
            size: n,
            traces,
            products,
        })
    }

    /// `Tr(A_k A_l)` for `k, l` in `1..=N`.
    pub fn product(&self, k: usize, l: usize) -> f64 {
        let (a, b) = if k <= l { (k - 1, l - 1) } else { (l - 1, k - 1) };
        let n = self.size;
        // rows before a hold n, n-1, ..., n-a+1 entries
        let offset = a * (2 * n - a + 1) / 2;
        self.products[offset + (b - a)]
    }

    pub fn summary(&self) -> ScanSummary {
        let n = self.size;
        let max_trace = self.traces[1..].iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let mut max_cross = 0.0f64;
        let mut max_diag = 0.0f64;
        for k in 1..=n {
            for l in k..=n {
                let v = self.product(k, l).abs();
                if k == l {
                    max_diag = max_diag.max(v);
                } else {
                    max_cross = max_cross.max(v);
                }
            }
        }
        ScanSummary {
            hurst: self.hurst,
            size: n,
            trace_a0: self.traces[0],
            max_trace,
            max_cross,
            max_square: max_diag,
        }
    }
}

/// Per-`(H, N)` maxima reported by [`conjecture_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSummary {
    pub hurst: f64,
    pub size: usize,
    /// `Tr(A_0)`, which equals `N`.
    pub trace_a0: f64,
    /// `max_{k>=1} |Tr(A_k)|`.
    pub max_trace: f64,
    /// `max_{k≠l} |Tr(A_k A_l)|`.
    pub max_cross: f64,
    /// `max_k |Tr(A_k²)|`, for reference.
    pub max_square: f64,
}

/// A consecutive doubling of `N` whose maxima grew by more than the allowed
/// factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthViolation {
    pub hurst: f64,
    pub from: usize,
    pub to: usize,
    pub statistic: &'static str,
    pub factor: f64,
}

/// Summaries of every `(H, N)` cell plus the growth violations among
/// consecutive sizes of the same `H`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureScan {
    pub summaries: Vec<ScanSummary>,
    pub violations: Vec<GrowthViolation>,
}

/// Scans the trace maxima over the given grid of `H` and `N`.
pub fn conjecture_scan(hursts: &[f64], sizes: &[usize], growth_limit: f64) -> Result<ConjectureScan> {
    use rayon::prelude::*;
    let cells: Vec<(f64, usize)> = hursts
        .iter()
        .flat_map(|&h| sizes.iter().map(move |&n| (h, n)))
        .collect();
    let summaries = cells
        .par_iter()
        .map(|&(h, n)| TraceTable::compute(h, n).map(|t| t.summary()))
        .collect::<Result<Vec<_>>>()?;
    let mut violations = Vec::new();
    for w in summaries.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.hurst != b.hurst {
            continue;
        }
        for (name, x, y) in [
            ("max_trace", a.max_trace, b.max_trace),
            ("max_cross", a.max_cross, b.max_cross),
        ] {
            // maxima below 1e-12 are zero up to rounding (H = 1/2)
            if y > 1e-12 && y > growth_limit * x.max(1e-12) {
                violations.push(GrowthViolation {
                    hurst: a.hurst,
                    from: a.size,
                    to: b.size,
                    statistic: name,
                    factor: y / x,
                });
            }
        }
    }
    Ok(ConjectureScan {
        summaries,
        violations,
    })
}

/// `E(Q^{k,0} Q^{l,0}) = Tr(A_k) Tr(A_l) + Tr(A_{|k−l|}) + Tr(A_k A_l)`.
pub fn q_moment(hurst: f64, n: usize, k: usize, l: usize) -> Result<f64> {
    check_shift(n, k)?;
    check_shift(n, l)?;
    let cov = FgnCovariance::new(hurst, 1.0, n)?;
    let gk = shift_gram_with(&cov, k, 0)?;
    let gl = shift_gram_with(&cov, l, 0)?;
    let gd = shift_gram_with(&cov, k.max(l), k.min(l))?;
    Ok(gk.trace() * gl.trace() + gd.trace() + gk.trace_product(&gl))
}

/// Monte Carlo estimate of a moment with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloMoment {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte Carlo `E(Q^{k,0} Q^{l,0})` from `samples` draws of `2N` unit fGn
/// increments, `Q^{k,0} = (P_k ΔB)ᵀ Σ_N⁻¹ (P_0 ΔB)`.
pub fn q_moment_monte_carlo(
    hurst: f64,
    n: usize,
    pairs: &[(usize, usize)],
    samples: usize,
    seed: SeedSpec,
) -> Result<Vec<MonteCarloMoment>> {
    for &(k, l) in pairs {
        check_shift(n, k)?;
        check_shift(n, l)?;
    }
    if samples < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    let cov = FgnCovariance::new(hurst, 1.0, n)?;
    let sampler = FgnSampler::new(hurst, 1.0, 2 * n)?;
    let mut shifts: Vec<usize> = pairs.iter().flat_map(|&(k, l)| [k, l]).collect();
    shifts.push(0);
    shifts.sort_unstable();
    shifts.dedup();
    let mut rng = seed.rng(NoiseStream::Auxiliary);
    let mut values = vec![Vec::with_capacity(samples); pairs.len()];
    let mut q = vec![0.0; n + 1];
    for _ in 0..samples {
        let x = sampler.sample(&mut rng);
        let w0 = cov.whiten(&x[..n])?;
        for &k in &shifts {
            let wk = cov.whiten(&x[k..k + n])?;
            q[k] = wk.iter().zip(&w0).map(|(a, b)| a * b).sum();
        }
        for (slot, &(k, l)) in values.iter_mut().zip(pairs) {
            slot.push(q[k] * q[l]);
        }
    }
    values
        .iter()
        .map(|v| {
            let s = summarize(v)?;
            Ok(MonteCarloMoment {
                mean: s.mean,
                std_error: s.std_error,
                samples,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shift_is_identity() {
        for h in [0.3, 0.7] {
            let g = build_shift_gram(h, 40, 0).unwrap();
            let err = (&g.matrix - DMatrix::<f64>::identity(40, 40)).abs().max();
            assert!(err < 1e-8, "{err}");
        }
    }

    #[test]
    fn brownian_shift_is_nilpotent() {
        let g = build_shift_gram(0.5, 10, 3).unwrap();
        assert!(g.trace().abs() < 1e-15);
        for i in 0..10 {
            for j in 0..10 {
                let want = if j == i + 3 { 1.0 } else { 0.0 };
                assert!((g.matrix[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn shift_consistency() {
        let cov = FgnCovariance::new(0.7, 1.0, 30).unwrap();
        let a = shift_gram_with(&cov, 9, 4).unwrap();
        let b = shift_gram_with(&cov, 5, 0).unwrap();
        assert!((&a.matrix - &b.matrix).abs().max() < 1e-8);
    }

    #[test]
    fn table_agrees_with_explicit_grams() {
        let h = 0.3;
        let n = 12;
        let t = TraceTable::compute(h, n).unwrap();
        assert!((t.traces[0] - n as f64).abs() < 1e-9);
        let cov = FgnCovariance::new(h, 1.0, n).unwrap();
        let grams: Vec<ShiftGram> = (0..=n).map(|k| shift_gram_with(&cov, k, 0).unwrap()).collect();
        for k in 0..=n {
            assert!((t.traces[k] - grams[k].trace()).abs() < 1e-10);
        }
        for k in 1..=n {
            for l in 1..=n {
                let want = grams[k].trace_product(&grams[l]);
                assert!((t.product(k, l) - want).abs() < 1e-10, "({k}, {l})");
                assert!((grams[l].trace_product(&grams[k]) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn brownian_traces_vanish() {
        let t = TraceTable::compute(0.5, 16).unwrap();
        assert!(t.traces[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn wick_at_zero_shift() {
        for h in [0.3, 0.7] {
            let m = q_moment(h, 20, 0, 0).unwrap();
            assert!((m - 440.0).abs() < 1e-8, "{m}");
            let a = q_moment(h, 20, 3, 7).unwrap();
            let b = q_moment(h, 20, 7, 3).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }
}
