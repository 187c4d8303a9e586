use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform observation grid `{k * delta : k = 0..=count}` on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    delta: f64,
    horizon: f64,
    count: usize,
}

/// Builds a grid with `count = round(horizon / delta)` cells. The returned
/// horizon is recomputed as `count * delta`, so near-divisible input is
/// accepted and snapped.
pub fn make_grid(delta: f64, horizon: f64) -> Result<SamplingGrid> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!("time step must be positive, got {delta}")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
    }
    let count = (horizon / delta).round();
    if count < 1.0 {
        return Err(Error::invalid(format!(
            "horizon {horizon} is shorter than half a time step {delta}"
        )));
    }
    let count = count as usize;
    Ok(SamplingGrid {
        delta,
        horizon: count as f64 * delta,
        count,
    })
}

impl SamplingGrid {
    /// Grid with `count` cells of width `delta`.
    pub fn with_count(delta: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("grid needs at least one cell"));
        }
        make_grid(delta, delta * count as f64)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of cells `N`; the grid has `N + 1` nodes.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.delta
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.count).map(|k| self.time(k))
    }

    /// The grid with `factor` times as many cells over the same horizon.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::invalid("refinement factor must be positive"));
        }
        Self::with_count(self.delta / factor as f64, self.count * factor)
    }

    /// Every `factor`-th node of this grid, if `factor` divides the cell count.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.count % factor != 0 {
            return Err(Error::invalid(format!(
                "coarsening factor {factor} does not divide cell count {}",
                self.count
            )));
        }
        Self::with_count(self.delta * factor as f64, self.count / factor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_division() {
        let g = make_grid(0.1, 1.0).unwrap();
        assert_eq!(g.count(), 10);
        assert!((g.horizon() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rounding_recomputes_horizon() {
        let g = make_grid(0.3, 1.0).unwrap();
        assert_eq!(g.count(), 3);
        assert!((g.horizon() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(make_grid(-0.1, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_grid(0.1, 0.0), Err(Error::InvalidArgument(_))));
        assert!(make_grid(f64::NAN, 1.0).is_err());
        assert!(make_grid(1.0, 0.2).is_err());
    }

    #[test]
    fn idempotent() {
        for &(d, t) in &[(0.3, 1.0), (0.1, 1.0), (1.0 / 3.0, 7.0), (0.0125, 10.0), (0.7, 100.0)] {
            let g = make_grid(d, t).unwrap();
            let h = make_grid(g.delta(), g.horizon()).unwrap();
            assert_eq!(g, h);
        }
    }

    #[test]
    fn refine_and_coarsen() {
        let g = make_grid(0.25, 2.0).unwrap();
        let f = g.refine(4).unwrap();
        assert_eq!(f.count(), 32);
        assert_eq!(f.coarsen(4).unwrap().count(), 8);
        assert!(g.coarsen(3).is_err());
    }
}
