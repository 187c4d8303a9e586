use serde::{Deserialize, Serialize};

use super::SamplingGrid;
use crate::{Error, Result};

/// Samples of a scalar path at every node of a grid, `t = 0` included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    grid: SamplingGrid,
    values: Vec<f64>,
}

/// First differences of a trajectory, one per grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementVector {
    grid: SamplingGrid,
    deltas: Vec<f64>,
}

impl Trajectory {
    pub fn new(grid: SamplingGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.count() + 1 {
            return Err(Error::invalid(format!(
                "trajectory on {} cells needs {} values, got {}",
                grid.count(),
                grid.count() + 1,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite trajectory value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Cumulative sum of `inc` started from `start`.
    pub fn from_increments(start: f64, inc: &IncrementVector) -> Result<Self> {
        let mut values = Vec::with_capacity(inc.len() + 1);
        let mut acc = start;
        values.push(acc);
        for d in inc.as_slice() {
            acc += d;
            values.push(acc);
        }
        Self::new(*inc.grid(), values)
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn start(&self) -> f64 {
        self.values[0]
    }

    /// Every `factor`-th sample, on the correspondingly coarser grid.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        let grid = self.grid.coarsen(factor)?;
        let values = self.values.iter().step_by(factor).copied().collect();
        Self::new(grid, values)
    }

    /// `a + c * x`, pointwise.
    pub fn affine(&self, offset: f64, scale: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| offset + scale * v).collect())
    }
}

impl IncrementVector {
    pub fn new(grid: SamplingGrid, deltas: Vec<f64>) -> Result<Self> {
        if deltas.len() != grid.count() {
            return Err(Error::invalid(format!(
                "increment vector on {} cells has length {}",
                grid.count(),
                deltas.len()
            )));
        }
        if let Some(i) = deltas.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite increment at cell {i}")));
        }
        Ok(Self { grid, deltas })
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.deltas
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.deltas
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    /// Scales every increment by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.deltas.iter().map(|d| d * factor).collect())
    }
}

/// `deltas[k-1] = x_k - x_{k-1}` for `k = 1..=N`.
pub fn increments(x: &Trajectory) -> IncrementVector {
    let deltas = x.values.windows(2).map(|w| w[1] - w[0]).collect();
    IncrementVector {
        grid: x.grid,
        deltas,
    }
}

/// `x_k - 2 x_{k-1} + x_{k-2}` for `k = 2..=N`.
pub fn second_order_increments(x: &Trajectory) -> Result<Vec<f64>> {
    if x.grid.count() < 2 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: x.values.len(),
        });
    }
    Ok(x.values.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect())
}
