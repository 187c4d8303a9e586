use crate::{Error, Result};

/// `(sup_partitions Σ dist(t_i, t_{i+1})^q)^{1/q}` over partitions of the
/// nodes `0..n` that contain both end nodes.
///
/// Exact by dynamic programming, `V(j) = max_{i<j} V(i) + dist(i, j)^q`,
/// in `O(n²)` evaluations of `dist`. `q` only needs to be positive, so this
/// also serves the `p/m` exponents of higher rough-path levels.
pub fn p_variation_of(n: usize, q: f64, dist: impl Fn(usize, usize) -> f64) -> Result<f64> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::invalid(format!("variation exponent must be positive, got {q}")));
    }
    if n < 2 {
        return Ok(0.0);
    }
    let mut best = vec![0.0f64; n];
    for j in 1..n {
        let mut v = f64::NEG_INFINITY;
        for (i, &bi) in best[..j].iter().enumerate() {
            v = v.max(bi + dist(i, j).abs().powf(q));
        }
        best[j] = v;
    }
    Ok(best[n - 1].powf(1.0 / q))
}

/// p-variation of a scalar sample sequence, partitions restricted to the
/// samples.
pub fn p_variation_norm(samples: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    p_variation_of(samples.len(), p, |i, j| samples[j] - samples[i])
}

/// p-variation of an `R^d` sample sequence under the Euclidean norm.
pub fn p_variation_norm_nd(points: &[Vec<f64>], p: f64) -> Result<f64> {
    check_p(p)?;
    if let Some(first) = points.first() {
        if points.iter().any(|x| x.len() != first.len()) {
            return Err(Error::invalid("all points must have the same dimension"));
        }
    }
    p_variation_of(points.len(), p, |i, j| {
        points[j]
            .iter()
            .zip(&points[i])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    })
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exhaustive(z: &[f64], p: f64) -> f64 {
        let n = z.len();
        let interior = n.saturating_sub(2);
        let mut best = 0.0f64;
        for mask in 0u32..(1 << interior) {
            let mut prev = 0;
            let mut acc = 0.0;
            for i in 1..n {
                if i == n - 1 || mask & (1 << (i - 1)) != 0 {
                    acc += (z[i] - z[prev]).abs().powf(p);
                    prev = i;
                }
            }
            best = best.max(acc);
        }
        best.powf(1.0 / p)
    }

    #[test]
    fn examples() {
        let mono: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        for p in [1.0, 1.5, 2.0, 3.0] {
            assert!((p_variation_norm(&mono, p).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((p_variation_norm(&[0.0, 1.0, 0.0], 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(p_variation_norm(&[0.0, 1.0], 0.5).is_err());
        assert_eq!(p_variation_norm(&[3.0], 2.0).unwrap(), 0.0);
    }

    #[test]
    fn random_eight_cells_matches_enumeration() {
        let z = [0.0, 0.7, -0.2, 0.4, 0.35, 1.2, -0.8, 0.1, 0.3];
        for p in [1.0, 1.6, 2.5] {
            let dp = p_variation_norm(&z, p).unwrap();
            assert!((dp - exhaustive(&z, p)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn dp_equals_enumeration(z in prop::collection::vec(-5.0f64..5.0, 1..=11), p in 1.0f64..4.0) {
            let dp = p_variation_norm(&z, p).unwrap();
            let brute = exhaustive(&z, p);
            prop_assert!((dp - brute).abs() <= 1e-12 * brute.max(1.0));
        }

        #[test]
        fn at_least_total_increment(z in prop::collection::vec(-5.0f64..5.0, 2..40), p in 1.0f64..4.0) {
            let v = p_variation_norm(&z, p).unwrap();
            prop_assert!(v + 1e-12 >= (z[z.len() - 1] - z[0]).abs());
        }
    }
}
