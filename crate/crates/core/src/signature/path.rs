use super::{segment_signature, tensor_multiply, TruncatedTensor};
use crate::domain::SamplingGrid;
use crate::{Error, Result};

/// Continuous path in `R^d`, linear on every cell of a uniform grid, stored
/// as its start point and per-cell slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearPath {
    grid: SamplingGrid,
    start: Vec<f64>,
    // row k holds the slope on cell k
    gradients: Vec<Vec<f64>>,
}

impl PiecewiseLinearPath {
    pub fn new(grid: SamplingGrid, start: Vec<f64>, gradients: Vec<Vec<f64>>) -> Result<Self> {
        let d = start.len();
        if d == 0 {
            return Err(Error::invalid("path dimension must be at least 1"));
        }
        if gradients.len() != grid.count() {
            return Err(Error::invalid(format!(
                "{} slopes given for {} cells",
                gradients.len(),
                grid.count()
            )));
        }
        if gradients.iter().any(|g| g.len() != d) {
            return Err(Error::invalid("every slope must have the path dimension"));
        }
        if start.iter().chain(gradients.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("path data must be finite"));
        }
        Ok(Self {
            grid,
            start,
            gradients,
        })
    }

    /// Linear interpolation of the given node values (`N + 1` points).
    pub fn interpolate(grid: SamplingGrid, points: &[Vec<f64>]) -> Result<Self> {
        if points.len() != grid.count() + 1 {
            return Err(Error::invalid(format!(
                "{} points given for {} nodes",
                points.len(),
                grid.count() + 1
            )));
        }
        let delta = grid.delta();
        let gradients = points
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| (b - a) / delta).collect())
            .collect();
        Self::new(grid, points[0].clone(), gradients)
    }

    /// Scalar path from slopes.
    pub fn scalar(grid: SamplingGrid, start: f64, slopes: &[f64]) -> Result<Self> {
        Self::new(grid, vec![start], slopes.iter().map(|c| vec![*c]).collect())
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.start.len()
    }

    pub fn gradients(&self) -> &[Vec<f64>] {
        &self.gradients
    }

    /// Path value at node `k`: `start + δ Σ_{j<k} c_j`.
    pub fn node(&self, k: usize) -> Vec<f64> {
        let delta = self.grid.delta();
        let mut x = self.start.clone();
        for g in &self.gradients[..k] {
            x.iter_mut().zip(g).for_each(|(v, c)| *v += delta * c);
        }
        x
    }

    /// All node values.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let delta = self.grid.delta();
        let mut out = Vec::with_capacity(self.gradients.len() + 1);
        let mut x = self.start.clone();
        out.push(x.clone());
        for g in &self.gradients {
            x.iter_mut().zip(g).for_each(|(v, c)| *v += delta * c);
            out.push(x.clone());
        }
        out
    }
}

/// Signature over the nodes `from < to`: the ordered product of the segment
/// signatures of the cells in between.
pub fn pwl_signature_nodes(
    path: &PiecewiseLinearPath,
    level: usize,
    from: usize,
    to: usize,
) -> Result<TruncatedTensor> {
    if from >= to || to > path.grid.count() {
        return Err(Error::invalid(format!(
            "span ({from}, {to}) is not an increasing pair of nodes in 0..={}",
            path.grid.count()
        )));
    }
    let delta = path.grid.delta();
    let mut sig = TruncatedTensor::unit(path.dim(), level)?;
    for g in &path.gradients[from..to] {
        let inc: Vec<f64> = g.iter().map(|c| c * delta).collect();
        sig = tensor_multiply(&sig, &segment_signature(&inc, level)?)?;
    }
    Ok(sig)
}

/// Signature over the time span `(s, t)`, both of which must be grid nodes.
pub fn pwl_signature(
    path: &PiecewiseLinearPath,
    level: usize,
    span: (f64, f64),
) -> Result<TruncatedTensor> {
    let from = node_index(&path.grid, span.0)?;
    let to = node_index(&path.grid, span.1)?;
    pwl_signature_nodes(path, level, from, to)
}

fn node_index(grid: &SamplingGrid, t: f64) -> Result<usize> {
    let k = (t / grid.delta()).round();
    if !(k >= 0.0 && k <= grid.count() as f64) || (t - k * grid.delta()).abs() > 1e-9 * grid.delta() {
        return Err(Error::invalid(format!("time {t} is not a grid node")));
    }
    Ok(k as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn back_and_forth_is_unit() {
        let grid = SamplingGrid::with_count(0.5, 2).unwrap();
        let p = PiecewiseLinearPath::new(grid, vec![0.0, 0.0], vec![vec![1.0, -2.0], vec![-1.0, 2.0]])
            .unwrap();
        let sig = pwl_signature(&p, 3, (0.0, 1.0)).unwrap();
        let unit = TruncatedTensor::unit(2, 3).unwrap();
        assert!(sig.sub(&unit).unwrap().norm() < 1e-15);
    }

    #[test]
    fn level_one_telescopes() {
        let grid = SamplingGrid::with_count(0.1, 5).unwrap();
        let pts: Vec<Vec<f64>> = (0..6).map(|k| vec![(k as f64).sin(), (k * k) as f64]).collect();
        let p = PiecewiseLinearPath::interpolate(grid, &pts).unwrap();
        let sig = pwl_signature(&p, 2, (0.1, 0.4)).unwrap();
        for i in 0..2 {
            assert!((sig.component(1)[i] - (pts[4][i] - pts[1][i])).abs() < 1e-12);
        }
        for (a, b) in p.nodes().iter().zip(&pts) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn span_must_be_on_grid() {
        let grid = SamplingGrid::with_count(0.1, 5).unwrap();
        let p = PiecewiseLinearPath::scalar(grid, 0.0, &[1.0; 5]).unwrap();
        assert!(pwl_signature(&p, 2, (0.05, 0.3)).is_err());
        assert!(pwl_signature(&p, 2, (0.3, 0.1)).is_err());
        assert!(pwl_signature(&p, 2, (0.0, 0.6)).is_err());
    }
}
