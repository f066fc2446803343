use crate::consts::ROW_SUM_TOL;
use crate::error::{Error, Result};

/// Row-stochastic transition matrix over a finite state space.
///
/// Entry `(v, v')` is the probability of moving from state `v` to `v'` at a
/// single jump. Rows must sum to 1 within [`ROW_SUM_TOL`] and entries must lie
/// in `[0, 1]`. Zero entries are structural: the positive-entry pattern
/// defines the transition digraph used by the decomposition, with no epsilon
/// threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::NotStochastic("empty matrix".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::NotStochastic(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for (k, &e) in entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&e) || !e.is_finite() {
                return Err(Error::NotStochastic(format!(
                    "entry ({}, {}) = {e} outside [0, 1]",
                    k / dim,
                    k % dim
                )));
            }
        }
        for v in 0..dim {
            let s: f64 = entries[v * dim..(v + 1) * dim].iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotStochastic(format!(
                    "row {v} sums to {s} (|deviation| > {ROW_SUM_TOL:e})"
                )));
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in &rows {
            if r.len() != dim {
                return Err(Error::NotStochastic("matrix is not square".into()));
            }
            entries.extend_from_slice(r);
        }
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for v in 0..dim {
            entries[v * dim + v] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, v: usize, w: usize) -> f64 {
        self.entries[v * self.dim + w]
    }

    #[inline]
    pub fn row(&self, v: usize) -> &[f64] {
        &self.entries[v * self.dim..(v + 1) * self.dim]
    }

    /// Sub-block `P[rows x cols]` in row-major order.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(rows.len() * cols.len());
        for &v in rows {
            for &w in cols {
                out.push(self.entry(v, w));
            }
        }
        out
    }

    /// Adjacency lists of the positive-entry digraph (self-loops omitted).
    pub fn positive_adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.dim)
            .map(|v| {
                (0..self.dim)
                    .filter(|&w| w != v && self.entry(v, w) > 0.0)
                    .collect()
            })
            .collect()
    }

    /// Left action on a law: `out = mu^T P`.
    pub fn propagate(&self, mu: &[f64], out: &mut [f64]) {
        debug_assert_eq!(mu.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        out.fill(0.0);
        for (v, &m) in mu.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let row = self.row(v);
            for (o, &p) in out.iter_mut().zip(row) {
                *o += m * p;
            }
        }
    }

    /// Permuted matrix `Q(i, j) = P(perm[i], perm[j])`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut entries = vec![0.0; self.dim * self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries[i * self.dim + j] = self.entry(perm[i], perm[j]);
            }
        }
        Self {
            dim: self.dim,
            entries,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rows() {
        assert!(StochasticMatrix::from_rows(vec![vec![0.5, 0.4], vec![0.0, 1.0]]).is_err());
        assert!(StochasticMatrix::from_rows(vec![vec![1.2, -0.2], vec![0.0, 1.0]]).is_err());
        assert!(StochasticMatrix::from_rows(vec![vec![0.5, 0.5, 0.0], vec![0.0, 1.0, 0.0]]).is_err());
    }

    #[test]
    fn propagate_matches_hand_product() {
        let p = StochasticMatrix::from_rows(vec![vec![0.7, 0.3], vec![0.1, 0.9]]).unwrap();
        let mu = [0.25, 0.75];
        let mut out = [0.0; 2];
        p.propagate(&mu, &mut out);
        assert!((out[0] - 0.25).abs() < 1e-15);
        assert!((out[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn block_extracts_submatrix() {
        let p = StochasticMatrix::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.2, 0.5, 0.3],
            vec![0.1, 0.4, 0.5],
        ])
        .unwrap();
        let q = p.block(&[1, 2], &[1, 2]);
        assert_eq!(q, vec![0.5, 0.3, 0.4, 0.5]);
    }
}
