//! Toeplitz covariance of fractional Gaussian noise.
//!
//! [`FgnCovariance`] owns the dense covariance of `N` consecutive fGn
//! increments together with its Cholesky factor `L`. Quadratic forms
//! `u' Σ⁻¹ v` are evaluated by whitening both vectors with `L⁻¹`; the inverse
//! matrix is never formed.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::gamma;

use crate::domain::check_hurst;
use crate::{Error, Result};

/// Above this size `inverse_spectral_norm` switches from a dense symmetric
/// eigen-solve to Lanczos iteration on `Σ⁻¹`.
pub const EIGEN_SOLVE_LIMIT: usize = 2048;

/// Relative tolerance of the smallest-eigenvalue computation.
pub const EIGEN_TOLERANCE: f64 = 1e-10;

const SERIES_LAG: usize = 32;

/// Autocovariance of unit-step fGn at lag `k`,
/// `½(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`.
///
/// Large lags use the binomial series `k^{2H} Σ_{j≥1} C(2H, 2j) k^{-2j}` of
/// the same expression, which avoids the cancellation of the three-term
/// second difference.
pub(crate) fn unit_autocovariance(hurst: f64, k: usize) -> f64 {
    let a = 2.0 * hurst;
    match k {
        0 => 1.0,
        k if k < SERIES_LAG => {
            let k = k as f64;
            0.5 * ((k + 1.0).powf(a) - 2.0 * k.powf(a) + (k - 1.0).powf(a))
        }
        k => {
            let kf = k as f64;
            let inv2 = 1.0 / (kf * kf);
            let mut coef = 1.0; // C(a, 0)
            let mut pow = 1.0;
            let mut sum = 0.0;
            for m in 1..=40 {
                coef *= (a - (m as f64) + 1.0) / m as f64;
                if m % 2 == 0 {
                    pow *= inv2;
                    let term = coef * pow;
                    sum += term;
                    if term.abs() <= 1e-18 * sum.abs() {
                        break;
                    }
                }
            }
            kf.powf(a) * sum
        }
    }
}

/// Covariance `γ(k) = E[ΔB_i ΔB_{i+k}]` of fGn increments over cells of width
/// `delta`; `γ(0) = delta^{2H}`.
pub fn fgn_autocovariance(hurst: f64, delta: f64, lag: usize) -> Result<f64> {
    check_hurst(hurst)?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!("time step must be positive, got {delta}")));
    }
    Ok(delta.powf(2.0 * hurst) * unit_autocovariance(hurst, lag))
}

/// Dense fGn covariance with its cached lower Cholesky factor.
#[derive(Debug, Clone)]
pub struct FgnCovariance {
    hurst: f64,
    delta: f64,
    first_row: Vec<f64>,
    // column-major lower factor, Σ = L Lᵀ
    factor: DMatrix<f64>,
}

/// Builds the `size × size` Toeplitz covariance of fGn with step `delta` and
/// factorizes it.
pub fn build_covariance(hurst: f64, delta: f64, size: usize) -> Result<FgnCovariance> {
    FgnCovariance::new(hurst, delta, size)
}

impl FgnCovariance {
    pub fn new(hurst: f64, delta: f64, size: usize) -> Result<Self> {
        check_hurst(hurst)?;
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {delta}")));
        }
        if size == 0 {
            return Err(Error::invalid("covariance size must be at least 1"));
        }
        let scale = delta.powf(2.0 * hurst);
        let first_row: Vec<f64> = (0..size)
            .map(|k| scale * unit_autocovariance(hurst, k))
            .collect();
        let matrix = toeplitz(&first_row);
        let factor = nalgebra::Cholesky::new(matrix)
            .ok_or(Error::IllConditioned {
                size,
                hurst,
                delta,
            })?
            .unpack();
        if factor.diagonal().iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::IllConditioned {
                size,
                hurst,
                delta,
            });
        }
        Ok(Self {
            hurst,
            delta,
            first_row,
            factor,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn size(&self) -> usize {
        self.first_row.len()
    }

    /// `γ(0), …, γ(N−1)`.
    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        toeplitz(&self.first_row)
    }

    /// The lower Cholesky factor `L`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// `Σ v` using the Toeplitz structure.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        let n = v.len();
        Ok((0..n)
            .map(|i| (0..n).map(|j| self.first_row[i.abs_diff(j)] * v[j]).sum())
            .collect())
    }

    /// `L w`: maps i.i.d. standard normals to a sample with covariance `Σ`.
    pub fn color(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_len(w.len())?;
        let n = w.len();
        let l = self.factor.as_slice();
        let mut out = vec![0.0; n];
        for (j, &wj) in w.iter().enumerate() {
            if wj == 0.0 {
                continue;
            }
            let col = &l[j * n..(j + 1) * n];
            for i in j..n {
                out[i] += col[i] * wj;
            }
        }
        Ok(out)
    }

    /// `L⁻¹ u` by forward substitution.
    pub fn whiten(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u.len())?;
        let mut x = u.to_vec();
        self.whiten_in_place(&mut x);
        Ok(x)
    }

    fn whiten_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        let l = self.factor.as_slice();
        for j in 0..n {
            let col = &l[j * n..(j + 1) * n];
            let xj = x[j] / col[j];
            x[j] = xj;
            if xj != 0.0 {
                for i in j + 1..n {
                    x[i] -= col[i] * xj;
                }
            }
        }
    }

    fn back_substitute_in_place(&self, x: &mut [f64]) {
        // solves Lᵀ y = x
        let n = x.len();
        let l = self.factor.as_slice();
        for j in (0..n).rev() {
            let col = &l[j * n..(j + 1) * n];
            let dot: f64 = (j + 1..n).map(|i| col[i] * x[i]).sum();
            x[j] = (x[j] - dot) / col[j];
        }
    }

    /// `Σ⁻¹ v` via two triangular solves.
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        let mut x = v.to_vec();
        self.whiten_in_place(&mut x);
        self.back_substitute_in_place(&mut x);
        Ok(x)
    }

    /// `Σ⁻¹ M` column by column.
    pub fn solve_matrix(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_len(m.nrows())?;
        let mut out = m.clone();
        let n = m.nrows();
        for mut col in out.column_iter_mut() {
            let s = col.as_mut_slice();
            debug_assert_eq!(s.len(), n);
            self.whiten_in_place(s);
            self.back_substitute_in_place(s);
        }
        Ok(out)
    }

    /// `log det Σ`.
    pub fn log_det(&self) -> f64 {
        2.0 * self.factor.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.size() {
            return Err(Error::invalid(format!(
                "vector length {len} does not match covariance size {}",
                self.size()
            )));
        }
        Ok(())
    }
}

/// `uᵀ Σ⁻¹ v`, computed as `(L⁻¹u)·(L⁻¹v)`.
pub fn quadratic_form(cov: &FgnCovariance, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "quadratic form arguments have lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let wu = cov.whiten(u)?;
    if std::ptr::eq(u, v) || u == v {
        return Ok(wu.iter().map(|a| a * a).sum());
    }
    let wv = cov.whiten(v)?;
    Ok(wu.iter().zip(&wv).map(|(a, b)| a * b).sum())
}

/// Method used for the smallest eigenvalue of `Σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    /// Dense symmetric eigen-solve up to [`EIGEN_SOLVE_LIMIT`], Lanczos
    /// iteration above.
    Auto,
    Dense,
    Lanczos,
}

/// `‖Σ⁻¹‖₂ = 1 / λ_min(Σ)`.
pub fn inverse_spectral_norm(cov: &FgnCovariance) -> Result<f64> {
    inverse_spectral_norm_with(cov, EigenMethod::Auto)
}

pub fn inverse_spectral_norm_with(cov: &FgnCovariance, method: EigenMethod) -> Result<f64> {
    let n = cov.size();
    let dense = match method {
        EigenMethod::Auto => n <= EIGEN_SOLVE_LIMIT,
        EigenMethod::Dense => true,
        EigenMethod::Lanczos => false,
    };
    let lambda_min = if n == 1 {
        cov.first_row[0]
    } else if dense {
        let eig = SymmetricEigen::new(cov.matrix());
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        smallest_eigenvalue_lanczos(cov)?
    };
    if !(lambda_min > 0.0) {
        return Err(Error::NumericFailure(format!(
            "non-positive smallest eigenvalue {lambda_min:e}"
        )));
    }
    Ok(1.0 / lambda_min)
}

fn smallest_eigenvalue_lanczos(cov: &FgnCovariance) -> Result<f64> {
    // Lanczos on Σ⁻¹ with full reorthogonalization: the Krylov space of
    // inverse iteration, without plain power iteration's stall on the
    // clustered low end of the fGn spectrum.
    const MAX_ITER: usize = 400;
    let n = cov.size();
    let steps = MAX_ITER.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut q: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } + 1.0 / (1.0 + i as f64))
        .collect();
    normalize(&mut q);
    let mut previous = f64::NAN;
    for j in 0..steps {
        let mut w = cov.solve(&q)?;
        let a: f64 = w.iter().zip(&q).map(|(x, y)| x * y).sum();
        basis.push(q);
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c: f64 = w.iter().zip(v).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let m = j + 1;
        let invariant = b <= 1e-300;
        if m % 8 != 0 && m != steps && !invariant {
            beta.push(b);
            q = w.into_iter().map(|x| x / b).collect();
            continue;
        }
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r.abs_diff(c) == 1 {
                beta[r.min(c)]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (idx, &top) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty tridiagonal");
        let residual = (b * eig.eigenvectors[(m - 1, idx)]).abs();
        if invariant
            || (residual <= EIGEN_TOLERANCE * top.abs()
                && (top - previous).abs() <= EIGEN_TOLERANCE * top.abs())
        {
            return Ok(1.0 / top);
        }
        previous = top;
        beta.push(b);
        q = w.into_iter().map(|x| x / b).collect();
    }
    Err(Error::NumericFailure(format!(
        "Lanczos iteration did not converge in {steps} steps (N = {n})"
    )))
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}

pub(crate) fn toeplitz(first_row: &[f64]) -> DMatrix<f64> {
    let n = first_row.len();
    DMatrix::from_fn(n, n, |i, j| first_row[i.abs_diff(j)])
}

/// Large-lag expansion of the stationary fOU autocovariance with
/// `λ = 1/ε`, `β = σ/ε^H`:
/// `½σ² Σ_{n=1}^{terms} (Π_{k=0}^{2n−1}(2H−k)) (s/ε)^{2H−2n}`.
pub fn fou_autocovariance_expansion(
    hurst: f64,
    sigma: f64,
    epsilon: f64,
    lag: f64,
    terms: usize,
) -> Result<f64> {
    check_hurst(hurst)?;
    if hurst == 0.5 {
        return Err(Error::Unsupported(
            "the large-lag expansion excludes H = 1/2".into(),
        ));
    }
    if !(lag > 0.0 && epsilon > 0.0) || terms == 0 {
        return Err(Error::invalid("expansion needs lag > 0, epsilon > 0 and at least one term"));
    }
    let a = 2.0 * hurst;
    let r = lag / epsilon;
    let mut product = 1.0;
    let mut sum = 0.0;
    for n in 1..=terms {
        for k in (2 * n - 2)..(2 * n) {
            product *= a - k as f64;
        }
        sum += product * r.powf(a - 2.0 * n as f64);
    }
    Ok(0.5 * sigma * sigma * sum)
}

/// Stationary variance of `dY = −λY dt + β dB^H`, `β² H Γ(2H) λ^{−2H}`.
///
/// This fixes the otherwise unspecified constant in the invariant law
/// `N(0, σ² c_H / 2)` as `c_H = 2 H Γ(2H)`.
pub fn stationary_fou_variance(hurst: f64, lambda: f64, beta: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("mean reversion must be > 0, got {lambda}")));
    }
    Ok(beta * beta * hurst * gamma(2.0 * hurst) * lambda.powf(-2.0 * hurst))
}

/// `F(s) = ∫_0^∞ u^{1−2H} cos(us) / (1 + u²) du`.
///
/// The integrand of `∫ u^ν e^{ius}/(1+u²)` is analytic in the sector
/// `0 <= arg u <= π/4`, so the ray `u = v e^{iπ/4}` gives an exponentially
/// damped integral, evaluated with exp-sinh quadrature.
fn smoothing_integral(hurst: f64, s: f64) -> f64 {
    use rustfft::num_complex::Complex;
    let nu = 1.0 - 2.0 * hurst;
    if s == 0.0 {
        return std::f64::consts::FRAC_PI_2 / (std::f64::consts::PI * hurst).sin();
    }
    let f = |t: f64| -> Complex<f64> {
        let (sh, ch) = (t.sinh(), t.cosh());
        let v = (std::f64::consts::FRAC_PI_2 * sh).exp();
        if v == 0.0 || !v.is_finite() {
            return Complex::new(0.0, 0.0);
        }
        let decay = -s * v * std::f64::consts::FRAC_1_SQRT_2;
        if decay < -745.0 {
            return Complex::new(0.0, 0.0);
        }
        let jac = std::f64::consts::FRAC_PI_2 * ch * v;
        let phase = Complex::from_polar(decay.exp(), s * v * std::f64::consts::FRAC_1_SQRT_2);
        phase * (v.powf(nu) * jac) / Complex::new(1.0, v * v)
    };
    let span = 5.0;
    let mut h = 0.5;
    let mut sum: Complex<f64> = {
        let n = (span / h) as i64;
        (-n..=n).map(|k| f(k as f64 * h)).sum()
    };
    let mut value = sum * h;
    for _ in 0..10 {
        h *= 0.5;
        let n = (span / h) as i64;
        let odd: Complex<f64> = (-n..=n).filter(|k| k % 2 != 0).map(|k| f(k as f64 * h)).sum();
        sum += odd;
        let next = sum * h;
        let done = (next - value).norm() <= 1e-15 * next.norm().max(1e-300);
        value = next;
        if done {
            break;
        }
    }
    (Complex::from_polar(1.0, std::f64::consts::FRAC_PI_4 * (nu + 1.0)) * value).re
}

/// Increment autocovariance `γ(0..size)` on a grid of step `delta` for the
/// slow component of the physical fBM,
/// `dX = ε^{H−1} Y dt`, `dY = −Y/ε dt + σ ε^{−H} dB^H`, `Y` stationary.
///
/// `X` is `σB^H` passed through the filter `1/(1 + iεω)`, so its structure
/// function is `E(X_τ − X_0)² = σ² ε^{2H} (s^{2H} − Γ(2H+1) + 4c F(s))` with
/// `s = τ/ε` and `c = sin(πH) Γ(2H+1) / (2π)`. The `s^{2H}` part is the fGn
/// covariance and is taken from [`fgn_autocovariance`].
pub fn physical_increment_autocovariance(
    hurst: f64,
    sigma: f64,
    epsilon: f64,
    delta: f64,
    size: usize,
) -> Result<Vec<f64>> {
    check_hurst(hurst)?;
    if !(sigma > 0.0 && epsilon > 0.0 && delta > 0.0) {
        return Err(Error::invalid("sigma, epsilon and delta must be positive"));
    }
    let ratio = delta / epsilon;
    let c = (std::f64::consts::PI * hurst).sin() * gamma(2.0 * hurst + 1.0) / (2.0 * std::f64::consts::PI);
    let f: Vec<f64> = (0..=size).map(|k| smoothing_integral(hurst, k as f64 * ratio)).collect();
    let scale = sigma * sigma * epsilon.powf(2.0 * hurst);
    let rough = ratio.powf(2.0 * hurst);
    Ok((0..size)
        .map(|k| {
            let lower = f[k.abs_diff(1)];
            let second = f[k + 1] + lower - 2.0 * f[k];
            scale * (rough * unit_autocovariance(hurst, k) + 2.0 * c * second)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn naive(h: f64, k: usize) -> f64 {
        let k = k as f64;
        0.5 * ((k + 1.0).powf(2.0 * h) - 2.0 * k.powf(2.0 * h) + (k - 1.0).abs().powf(2.0 * h))
    }

    #[test]
    fn autocovariance_examples() {
        assert_relative_eq!(fgn_autocovariance(0.5, 0.1, 0).unwrap(), 0.1, max_relative = 1e-14);
        assert_eq!(fgn_autocovariance(0.5, 1.0, 3).unwrap(), 0.0);
        assert_relative_eq!(fgn_autocovariance(0.75, 1.0, 1).unwrap(), 0.414214, epsilon = 5e-7);
        assert_relative_eq!(fgn_autocovariance(0.3, 1.0, 1).unwrap(), -0.242142, epsilon = 5e-7);
        assert!(fgn_autocovariance(1.0, 1.0, 0).is_err());
        assert!(fgn_autocovariance(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn series_branch_matches_direct_formula() {
        for &h in &[0.1, 0.3, 0.5, 0.7, 0.95] {
            for k in [SERIES_LAG, SERIES_LAG + 1, 50, 100] {
                let a = unit_autocovariance(h, k);
                let b = naive(h, k);
                assert!((a - b).abs() <= 1e-11 * b.abs().max(1e-300) + 1e-15, "h={h} k={k} {a} {b}");
            }
            // asymptote H(2H-1) k^{2H-2}
            let k = 1_000_000usize;
            let lead = h * (2.0 * h - 1.0) * (k as f64).powf(2.0 * h - 2.0);
            let g = unit_autocovariance(h, k);
            if h != 0.5 {
                assert_relative_eq!(g, lead, max_relative = 1e-6);
            } else {
                assert_eq!(g, 0.0);
            }
        }
    }

    #[test]
    fn covariance_examples() {
        let c = build_covariance(0.5, 0.2, 5).unwrap();
        let m = c.matrix();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 0.2 } else { 0.0 };
                assert_relative_eq!(m[(i, j)], want, epsilon = 1e-15);
            }
        }
        let c = build_covariance(0.75, 1.0, 2).unwrap();
        assert_relative_eq!(c.matrix()[(0, 1)], 0.414214, epsilon = 5e-7);
        let c = build_covariance(0.3, 1.0, 2).unwrap();
        assert_relative_eq!(c.matrix()[(1, 0)], -0.242142, epsilon = 5e-7);
    }

    #[test]
    fn self_similarity() {
        for &h in &[0.2, 0.5, 0.8] {
            let a = build_covariance(h, 0.037, 40).unwrap();
            let b = build_covariance(h, 1.0, 40).unwrap();
            let s = 0.037f64.powf(2.0 * h);
            for (x, y) in a.first_row().iter().zip(b.first_row()) {
                assert!((x - s * y).abs() <= 1e-12 * x.abs().max(1e-300), "{x} {y}");
            }
        }
    }

    #[test]
    fn quadratic_form_examples() {
        let c = build_covariance(0.5, 0.25, 6).unwrap();
        let mut e1 = vec![0.0; 6];
        e1[0] = 1.0;
        assert_relative_eq!(quadratic_form(&c, &e1, &e1).unwrap(), 4.0, max_relative = 1e-14);

        let c = build_covariance(0.7, 0.1, 30).unwrap();
        let w: Vec<f64> = (0..30).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let u = c.color(&w).unwrap();
        let norm2: f64 = w.iter().map(|x| x * x).sum();
        assert_relative_eq!(quadratic_form(&c, &u, &u).unwrap(), norm2, max_relative = 1e-10);

        assert!(quadratic_form(&c, &u, &u[..29]).is_err());
    }

    #[test]
    fn solve_residual() {
        for &h in &[0.3, 0.5, 0.7] {
            let c = build_covariance(h, 0.01, 512).unwrap();
            let v: Vec<f64> = (0..512).map(|i| ((i as f64) * 0.37).sin() + 0.1).collect();
            let x = c.solve(&v).unwrap();
            let back = c.apply(&x).unwrap();
            let num: f64 = back.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(num / den < 1e-8, "H={h}: {}", num / den);
        }
    }

    #[test]
    fn spectral_norm_examples() {
        let c = build_covariance(0.5, 0.05, 64).unwrap();
        assert_relative_eq!(inverse_spectral_norm(&c).unwrap(), 20.0, max_relative = 1e-10);
        for &h in &[0.2, 0.7] {
            let c = build_covariance(h, 0.3, 1).unwrap();
            assert_relative_eq!(
                inverse_spectral_norm(&c).unwrap(),
                0.3f64.powf(-2.0 * h),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        for &h in &[0.3, 0.7] {
            let c = build_covariance(h, 1.0, 300).unwrap();
            let a = inverse_spectral_norm_with(&c, EigenMethod::Dense).unwrap();
            let b = inverse_spectral_norm_with(&c, EigenMethod::Lanczos).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
    }

    #[test]
    fn expansion_examples() {
        let v = fou_autocovariance_expansion(0.75, 1.0, 1.0, 10.0, 1).unwrap();
        assert_relative_eq!(v, 0.118585, epsilon = 5e-7);
        assert!(fou_autocovariance_expansion(0.25, 1.0, 0.1, 3.0, 1).unwrap() < 0.0);
        assert!(matches!(
            fou_autocovariance_expansion(0.5, 1.0, 1.0, 1.0, 1),
            Err(Error::Unsupported(_))
        ));
        // second term: ½ (1.5)(0.5)(-0.5)(-1.5) 50^{-2.5}
        let two = fou_autocovariance_expansion(0.75, 1.0, 1.0, 50.0, 2).unwrap();
        let one = fou_autocovariance_expansion(0.75, 1.0, 1.0, 50.0, 1).unwrap();
        assert_relative_eq!(two - one, 0.28125 * 50f64.powf(-2.5), max_relative = 1e-12);
    }

    #[test]
    fn stationary_variance_convention() {
        assert_relative_eq!(stationary_fou_variance(0.75, 1.0, 1.0).unwrap(), 0.664670, epsilon = 5e-7);
        assert_relative_eq!(stationary_fou_variance(0.5, 2.0, 3.0).unwrap(), 9.0 / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn smoothing_integral_brownian_closed_form() {
        for s in [0.01f64, 0.5, 1.0, 4.0, 30.0, 200.0] {
            let want = std::f64::consts::FRAC_PI_2 * (-s).exp();
            assert!((smoothing_integral(0.5, s) - want).abs() < 1e-13, "s = {s}");
        }
    }

    #[test]
    fn smoothing_integral_large_argument() {
        // leading terms of Σ_m (−1)^m Γ(ν+2m+1) cos(π(ν+2m+1)/2) s^{−(ν+2m+1)}
        for h in [0.3, 0.7] {
            let nu = 1.0 - 2.0 * h;
            let s: f64 = 60.0;
            let want: f64 = (0..6)
                .map(|m| {
                    let a = nu + 2.0 * m as f64 + 1.0;
                    (-1.0f64).powi(m) * gamma(a) * (std::f64::consts::FRAC_PI_2 * a).cos() * s.powf(-a)
                })
                .sum();
            let got = smoothing_integral(h, s);
            assert!((got - want).abs() < 1e-12 * want.abs().max(1e-3), "{h}: {got} vs {want}");
        }
    }

    #[test]
    fn physical_covariance_limits() {
        let (sigma, eps, delta) = (1.3, 0.02, 0.1);
        let g = physical_increment_autocovariance(0.5, sigma, eps, delta, 4).unwrap();
        let s = delta / eps;
        let d = |x: f64| sigma * sigma * eps * (x - 1.0 + (-x).exp());
        assert!((g[0] - d(s)).abs() < 1e-13);
        assert!((g[2] - 0.5 * (d(3.0 * s) + d(s) - 2.0 * d(2.0 * s))).abs() < 1e-13);
        // far from the smoothing scale the fGn covariance takes over, up to
        // corrections of order (ε/δ)^{2H}
        for h in [0.3, 0.7] {
            let g = physical_increment_autocovariance(h, 1.0, 1e-12, 0.01, 3).unwrap();
            for (k, v) in g.iter().enumerate() {
                let want = fgn_autocovariance(h, 0.01, k).unwrap();
                assert!((v - want).abs() < 1e-5 * want.abs(), "{h} {k}");
            }
        }
    }
}
