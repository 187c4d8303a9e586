use super::pvar::p_variation_of;
use crate::{Error, Result};

/// Geometric rough lift of a scalar path sampled at grid nodes. For `d = 1`
/// the shuffle identity forces the level-`m` increment over `(s, t)` to be
/// `(z_t − z_s)^m / m!`, so the samples determine the whole lift.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarRoughLift {
    base: Vec<f64>,
    level: usize,
    p: f64,
}

/// Number of levels a lift needs for Hölder exponent `H`: 2 for `H > 1/3`,
/// 3 for `H ∈ (1/4, 1/3]`.
pub fn level_for_hurst(hurst: f64) -> Result<usize> {
    if hurst > 1.0 / 3.0 && hurst < 1.0 {
        Ok(2)
    } else if hurst > 0.25 && hurst <= 1.0 / 3.0 {
        Ok(3)
    } else {
        Err(Error::Unsupported(format!(
            "rough lifts are implemented for H in (1/4, 1), got {hurst}"
        )))
    }
}

impl ScalarRoughLift {
    pub fn new(base: Vec<f64>, level: usize, p: f64) -> Result<Self> {
        if !(1..=super::MAX_LEVEL).contains(&level) {
            return Err(Error::invalid(format!("lift level must lie in 1..=3, got {level}")));
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::invalid(format!("p must be >= 1, got {p}")));
        }
        if base.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("lift samples must be finite"));
        }
        Ok(Self { base, level, p })
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Level-`m` component over the nodes `(i, j)`.
    pub fn increment(&self, m: usize, i: usize, j: usize) -> f64 {
        level_entry(self.base[j] - self.base[i], m)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.base.len() != other.base.len() {
            return Err(Error::invalid(format!(
                "lifts live on different grids ({} vs {} samples)",
                self.base.len(),
                other.base.len()
            )));
        }
        if self.level != other.level || self.p != other.p {
            return Err(Error::invalid("lifts differ in level or p"));
        }
        Ok(())
    }
}

fn level_entry(dz: f64, m: usize) -> f64 {
    match m {
        1 => dz,
        2 => 0.5 * dz * dz,
        3 => dz * dz * dz / 6.0,
        _ => unreachable!("levels are validated at construction"),
    }
}

/// Inhomogeneous p-variation distance: the maximum over levels `m` of the
/// `p/m`-variation of the level-`m` difference, raised to `m/p`. The
/// difference is taken coefficientwise, as displayed, without a group
/// renormalization.
pub fn rough_pvar_distance(a: &ScalarRoughLift, b: &ScalarRoughLift) -> Result<f64> {
    a.check_compatible(b)?;
    let mut dist = 0.0f64;
    for m in 1..=a.level {
        let q = a.p / m as f64;
        let v = p_variation_of(a.base.len(), q, |i, j| {
            a.increment(m, i, j) - b.increment(m, i, j)
        })?;
        dist = dist.max(v);
    }
    Ok(dist)
}

/// Hölder counterpart: `max_m sup_{s<t} |ΔZ^m_{s,t}| / |t − s|^{mα}` over node
/// pairs, for lifts sampled at `times`.
pub fn holder_rough_distance(
    a: &ScalarRoughLift,
    b: &ScalarRoughLift,
    times: &[f64],
    alpha: f64,
) -> Result<f64> {
    a.check_compatible(b)?;
    if times.len() != a.base.len() {
        return Err(Error::invalid("times must match the lift samples"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
    }
    let n = times.len();
    let mut sup = 0.0f64;
    for m in 1..=a.level {
        for i in 0..n {
            for j in i + 1..n {
                let diff = (a.increment(m, i, j) - b.increment(m, i, j)).abs();
                let gap = (times[j] - times[i]).powf(m as f64 * alpha);
                sup = sup.max(diff / gap);
            }
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::p_variation_norm;

    #[test]
    fn identical_lifts_are_at_distance_zero() {
        let z: Vec<f64> = (0..20).map(|k| (k as f64 * 0.7).sin()).collect();
        let a = ScalarRoughLift::new(z.clone(), 2, 1.6).unwrap();
        assert_eq!(rough_pvar_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn level_one_only_difference() {
        // with level 1 the distance is the p-variation of the difference path
        let z: Vec<f64> = (0..12).map(|k| (k as f64 * 1.3).cos()).collect();
        let w: Vec<f64> = (0..12).map(|k| 0.1 * k as f64).collect();
        let a = ScalarRoughLift::new(z.clone(), 1, 2.0).unwrap();
        let b = ScalarRoughLift::new(w.clone(), 1, 2.0).unwrap();
        let diff: Vec<f64> = z.iter().zip(&w).map(|(x, y)| x - y).collect();
        let want = p_variation_norm(&diff, 2.0).unwrap();
        assert!((rough_pvar_distance(&a, &b).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn levels_from_hurst() {
        assert_eq!(level_for_hurst(0.7).unwrap(), 2);
        assert_eq!(level_for_hurst(0.3).unwrap(), 3);
        assert!(level_for_hurst(0.2).is_err());
    }

    #[test]
    fn mismatched_lifts_are_rejected() {
        let a = ScalarRoughLift::new(vec![0.0; 4], 2, 2.0).unwrap();
        let b = ScalarRoughLift::new(vec![0.0; 5], 2, 2.0).unwrap();
        let c = ScalarRoughLift::new(vec![0.0; 4], 3, 2.0).unwrap();
        assert!(rough_pvar_distance(&a, &b).is_err());
        assert!(rough_pvar_distance(&a, &c).is_err());
    }

    #[test]
    fn holder_distance_of_a_line() {
        let times: Vec<f64> = (0..5).map(|k| k as f64 * 0.25).collect();
        let a = ScalarRoughLift::new(times.clone(), 1, 2.0).unwrap();
        let b = ScalarRoughLift::new(vec![0.0; 5], 1, 2.0).unwrap();
        // |t - s| / |t - s|^{1/2} is largest on the longest span
        let d = holder_rough_distance(&a, &b, &times, 0.5).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }
}
