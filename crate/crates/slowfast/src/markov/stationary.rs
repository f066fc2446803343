//! Stationary laws of closed irreducible classes.

use super::decompose::{decompose, ChainDecomposition};
use super::linalg;
use super::matrix::StochasticMatrix;
use crate::consts::{ROW_SUM_TOL, STATIONARY_RESIDUAL_TOL};
use crate::error::{Error, Result};

/// The unique invariant law `mu^(i)(x; .)` of the frozen process restricted to
/// one ergodic class, at a fixed slow state.
#[derive(Debug, Clone)]
pub struct ClassStationaryLaw {
    pub class_index: usize,
    /// Class member state indices, in the decomposition's order.
    pub states: Vec<usize>,
    /// Probability weights aligned with `states`.
    pub weights: Vec<f64>,
    pub anchor_x: Vec<f64>,
}

impl ClassStationaryLaw {
    /// Weight of global state `v`, zero outside the class.
    pub fn weight_of(&self, v: usize) -> f64 {
        self.states
            .iter()
            .position(|&s| s == v)
            .map_or(0.0, |k| self.weights[k])
    }
}

/// Solve `mu^T P_restricted = mu^T`, `sum mu = 1` on a closed irreducible
/// subset of states, replacing one balance equation by the normalization row.
pub fn stationary_weights(p: &StochasticMatrix, class: &[usize]) -> Result<Vec<f64>> {
    let m = class.len();
    if m == 0 {
        return Err(Error::InvalidInput("empty class".into()));
    }
    let q = p.block(class, class);

    for (r, &v) in class.iter().enumerate() {
        let s: f64 = q[r * m..(r + 1) * m].iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::ClassNotClosed(format!(
                "state {v} leaks mass {:.3e} outside the class",
                1.0 - s
            )));
        }
    }

    let restricted = StochasticMatrix::new(m, q.clone())?;
    let sub = decompose(&restricted);
    if sub.class_count() != 1 || sub.class(0).len() != m {
        return Err(Error::NotIrreducible(format!(
            "restricted matrix splits into {} terminal classes plus {} transients",
            sub.class_count(),
            sub.transient_set().len()
        )));
    }

    // rows of A: (Q^T - I) with the last balance equation replaced by ones
    let mut a = vec![0.0; m * m];
    for r in 0..m {
        for c in 0..m {
            a[r * m + c] = q[c * m + r] - if r == c { 1.0 } else { 0.0 };
        }
    }
    for c in 0..m {
        a[(m - 1) * m + c] = 1.0;
    }
    let mut b = vec![0.0; m];
    b[m - 1] = 1.0;

    let lu = linalg::lu_factor(a, m).ok_or_else(|| {
        Error::NotIrreducible("augmented stationarity system is singular".into())
    })?;
    let mut mu = lu.solve(&b);

    for w in &mut mu {
        if *w < 0.0 {
            if *w < -1e-12 {
                return Err(Error::NotIrreducible(format!(
                    "stationary solve produced weight {w}"
                )));
            }
            *w = 0.0;
        }
    }
    let total: f64 = mu.iter().sum();
    for w in &mut mu {
        *w /= total;
    }

    // residual ||mu^T Q - mu^T||_1
    let mut residual = 0.0;
    for c in 0..m {
        let mut s = -mu[c];
        for r in 0..m {
            s += mu[r] * q[r * m + c];
        }
        residual += s.abs();
    }
    if residual > STATIONARY_RESIDUAL_TOL {
        return Err(Error::NotIrreducible(format!(
            "stationarity residual {residual:.3e} exceeds {STATIONARY_RESIDUAL_TOL:e}"
        )));
    }

    Ok(mu)
}

/// Stationary law of class `class_index` of the decomposition `d`.
pub fn stationary_law(
    p: &StochasticMatrix,
    d: &ChainDecomposition,
    class_index: usize,
    anchor_x: &[f64],
) -> Result<ClassStationaryLaw> {
    if class_index >= d.class_count() {
        return Err(Error::ClassMissing { class: class_index });
    }
    let states = d.class(class_index).to_vec();
    let weights = stationary_weights(p, &states)?;
    Ok(ClassStationaryLaw {
        class_index,
        states,
        weights,
        anchor_x: anchor_x.to_vec(),
    })
}
