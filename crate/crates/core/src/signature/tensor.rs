use super::MAX_LEVEL;
use crate::{Error, Result};

/// Element of `T^{(n)}(R^d)`: one dense coefficient array of length `d^k`
/// per level `k = 0..=n`. Words index the arrays in base `d`, first letter
/// most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTensor {
    dim: usize,
    levels: Vec<Vec<f64>>,
}

fn check_shape(dim: usize, level: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::invalid("tensor dimension must be at least 1"));
    }
    if level == 0 || level > MAX_LEVEL {
        return Err(Error::invalid(format!(
            "truncation level must lie in 1..={MAX_LEVEL}, got {level}"
        )));
    }
    Ok(())
}

impl TruncatedTensor {
    /// The unit `(1, 0, …, 0)`.
    pub fn unit(dim: usize, level: usize) -> Result<Self> {
        check_shape(dim, level)?;
        let mut levels: Vec<Vec<f64>> = (0..=level).map(|k| vec![0.0; dim.pow(k as u32)]).collect();
        levels[0][0] = 1.0;
        Ok(Self { dim, levels })
    }

    /// Builds a tensor from explicit level arrays, level 0 included.
    pub fn from_levels(dim: usize, levels: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(dim, levels.len().saturating_sub(1))?;
        for (k, l) in levels.iter().enumerate() {
            if l.len() != dim.pow(k as u32) {
                return Err(Error::invalid(format!(
                    "level {k} needs {} coefficients, got {}",
                    dim.pow(k as u32),
                    l.len()
                )));
            }
            if l.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite coefficient at level {k}")));
            }
        }
        Ok(Self { dim, levels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn component(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Coefficient of `word`; the empty word gives the level-0 scalar.
    pub fn get(&self, word: &[usize]) -> Result<f64> {
        if word.len() > self.level() {
            return Err(Error::invalid(format!(
                "word of length {} exceeds truncation level {}",
                word.len(),
                self.level()
            )));
        }
        let mut idx = 0;
        for &letter in word {
            if letter >= self.dim {
                return Err(Error::invalid(format!(
                    "letter {letter} out of range for dimension {}",
                    self.dim
                )));
            }
            idx = idx * self.dim + letter;
        }
        Ok(self.levels[word.len()][idx])
    }

    /// Euclidean norm over all coefficients.
    pub fn norm(&self) -> f64 {
        self.levels.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Coefficientwise difference.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Ok(Self {
            dim: self.dim,
            levels,
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.level() != other.level() {
            return Err(Error::invalid(format!(
                "tensor shapes differ: (d={}, n={}) vs (d={}, n={})",
                self.dim,
                self.level(),
                other.dim,
                other.level()
            )));
        }
        Ok(())
    }
}

/// Truncated product `c_k = Σ_{i=0}^{k} a_i ⊗ b_{k-i}`.
pub fn tensor_multiply(a: &TruncatedTensor, b: &TruncatedTensor) -> Result<TruncatedTensor> {
    a.check_compatible(b)?;
    let levels = (0..=a.level())
        .map(|k| {
            let mut out = vec![0.0; a.dim.pow(k as u32)];
            for i in 0..=k {
                let (ai, bj) = (&a.levels[i], &b.levels[k - i]);
                // index of u⊗v is idx(u) * d^{|v|} + idx(v)
                let stride = bj.len();
                for (p, &x) in ai.iter().enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    let row = &mut out[p * stride..(p + 1) * stride];
                    row.iter_mut().zip(bj).for_each(|(o, &y)| *o += x * y);
                }
            }
            out
        })
        .collect();
    Ok(TruncatedTensor {
        dim: a.dim,
        levels,
    })
}

/// Signature of a straight segment: level `k` is `Δ^{⊗k} / k!`.
pub fn segment_signature(delta: &[f64], level: usize) -> Result<TruncatedTensor> {
    let d = delta.len();
    check_shape(d, level)?;
    if delta.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("segment increment must be finite"));
    }
    let mut levels = Vec::with_capacity(level + 1);
    levels.push(vec![1.0]);
    for k in 1..=level {
        let prev: &Vec<f64> = &levels[k - 1];
        let mut next = Vec::with_capacity(prev.len() * d);
        for &p in prev {
            next.extend(delta.iter().map(|&x| p * x / k as f64));
        }
        levels.push(next);
    }
    Ok(TruncatedTensor { dim: d, levels })
}

/// All interleavings of two words that keep each word's letter order.
pub fn shuffles(u: &[usize], v: &[usize]) -> Vec<Vec<usize>> {
    if u.is_empty() {
        return vec![v.to_vec()];
    }
    if v.is_empty() {
        return vec![u.to_vec()];
    }
    let mut out = Vec::new();
    for mut w in shuffles(&u[..u.len() - 1], v) {
        w.push(u[u.len() - 1]);
        out.push(w);
    }
    for mut w in shuffles(u, &v[..v.len() - 1]) {
        w.push(v[v.len() - 1]);
        out.push(w);
    }
    out
}

/// `|Z^u Z^v − Σ_{w ∈ u ⧢ v} Z^w|`; zero for every group-like tensor.
pub fn shuffle_residual(sig: &TruncatedTensor, u: &[usize], v: &[usize]) -> Result<f64> {
    if u.len() + v.len() > sig.level() {
        return Err(Error::invalid(format!(
            "words of total length {} exceed truncation level {}",
            u.len() + v.len(),
            sig.level()
        )));
    }
    let lhs = sig.get(u)? * sig.get(v)?;
    let mut rhs = 0.0;
    for w in shuffles(u, v) {
        rhs += sig.get(&w)?;
    }
    Ok((lhs - rhs).abs())
}
