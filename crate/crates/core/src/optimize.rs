//! Bounded scalar minimization: a uniform grid scan followed by golden-section
//! refinement of the best bracket.

use crate::{Error, Result};

/// Grid points of the initial scan.
pub const SCAN_POINTS: usize = 64;

/// Width at which golden-section refinement stops.
pub const INTERVAL_TOLERANCE: f64 = 1e-8;

/// Minimizer and minimum of `f` on `[lo, hi]`. Non-finite values count as
/// `+∞`; an everywhere non-finite objective is an estimation failure.
pub fn minimize_scalar(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<(f64, f64)> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::invalid(format!("invalid search interval [{lo}, {hi}]")));
    }
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    if lo == hi {
        let v = eval(lo);
        return finite_or_fail(lo, v);
    }
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let node = |i: usize| if i == SCAN_POINTS - 1 { hi } else { lo + step * i as f64 };
    let (mut best_i, mut best_v) = (0, f64::INFINITY);
    for i in 0..SCAN_POINTS {
        let v = eval(node(i));
        if v < best_v {
            best_i = i;
            best_v = v;
        }
    }
    if !best_v.is_finite() {
        return Err(Error::EstimationFailure("objective is not finite anywhere on the search grid".into()));
    }
    let mut a = node(best_i.saturating_sub(1));
    let mut b = node((best_i + 1).min(SCAN_POINTS - 1));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    while b - a > INTERVAL_TOLERANCE {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = eval(d);
        }
    }
    let mid = 0.5 * (a + b);
    let fm = eval(mid);
    // the scan node can beat the refined point when the objective is flat or
    // not unimodal inside the bracket
    let (x, v) = [(mid, fm), (c, fc), (d, fd), (node(best_i), best_v)]
        .into_iter()
        .fold((mid, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
    finite_or_fail(x, v)
}

fn finite_or_fail(x: f64, v: f64) -> Result<(f64, f64)> {
    if v.is_finite() {
        Ok((x, v))
    } else {
        Err(Error::EstimationFailure("objective is not finite".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_and_boundary_minima() {
        let (x, v) = minimize_scalar(|x| (x - 0.3).powi(2) + 1.0, -2.0, 5.0).unwrap();
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
        let (x, _) = minimize_scalar(|x| x, 1.0, 2.0).unwrap();
        assert!((x - 1.0).abs() < 1e-8);
        let (x, _) = minimize_scalar(|x| -x, 1.0, 2.0).unwrap();
        assert!((x - 2.0).abs() < 1e-8);
    }

    #[test]
    fn handles_non_finite_regions() {
        let (x, _) = minimize_scalar(|x| if x < 0.5 { f64::NAN } else { (x - 0.7).powi(2) }, 0.0, 1.0).unwrap();
        assert!((x - 0.7).abs() < 1e-7);
        assert!(minimize_scalar(|_| f64::NAN, 0.0, 1.0).is_err());
        assert!(minimize_scalar(|x| x, 1.0, 0.0).is_err());
    }
}
