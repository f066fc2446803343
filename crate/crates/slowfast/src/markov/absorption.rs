//! Absorption probabilities `q^(i)(x, v)` via the first-step linear system.

use super::decompose::ChainDecomposition;
use super::linalg;
use super::matrix::StochasticMatrix;
use crate::consts::MASS_TOL;
use crate::error::{Error, Result};

/// Per-state absorption probabilities into each ergodic class, computed at a
/// fixed slow state `anchor_x`. Row `v` is the probability vector
/// `(q^(1)(x, v), .., q^(L)(x, v))`.
#[derive(Debug, Clone)]
pub struct AbsorptionProfile {
    probabilities: Vec<f64>,
    class_count: usize,
    anchor_x: Vec<f64>,
}

impl AbsorptionProfile {
    pub fn q(&self, v: usize, class: usize) -> f64 {
        self.probabilities[v * self.class_count + class]
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.probabilities[v * self.class_count..(v + 1) * self.class_count]
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn anchor_x(&self) -> &[f64] {
        &self.anchor_x
    }
}

/// Solve `q^(i)(v) = sum_w P(v, w) q^(i)(w)` for transient `v`, with boundary
/// values 1 on `E^(i)` and 0 on the other classes, by one dense LU solve of
/// `(I - P^NA)` restricted to the transient set.
pub fn absorption_probabilities(
    p: &StochasticMatrix,
    d: &ChainDecomposition,
    anchor_x: &[f64],
) -> Result<AbsorptionProfile> {
    let n = p.dim();
    let l = d.class_count();
    let trans = d.transient_set();
    let t = trans.len();

    let mut probabilities = vec![0.0; n * l];
    for v in 0..n {
        if let Some(i) = d.class_of(v) {
            probabilities[v * l + i] = 1.0;
        }
    }

    if t > 0 {
        // a = I - Q on the transient block
        let q_block = p.block(trans, trans);
        let mut a = vec![0.0; t * t];
        for r in 0..t {
            for c in 0..t {
                a[r * t + c] = if r == c { 1.0 } else { 0.0 } - q_block[r * t + c];
            }
        }
        let lu = linalg::lu_factor(a.clone(), t).ok_or(Error::SingularSystem)?;

        for i in 0..l {
            // rhs_r = total one-step mass from transient state r into class i
            let rhs: Vec<f64> = trans
                .iter()
                .map(|&v| d.class(i).iter().map(|&w| p.entry(v, w)).sum())
                .collect();
            let x = lu.solve(&rhs);
            if linalg::residual_inf(&a, t, &x, &rhs) > 1e-8 {
                return Err(Error::SingularSystem);
            }
            for (r, &v) in trans.iter().enumerate() {
                probabilities[v * l + i] = x[r];
            }
        }

        for &v in trans {
            let s: f64 = probabilities[v * l..(v + 1) * l].iter().sum();
            if (s - 1.0).abs() > MASS_TOL {
                return Err(Error::SingularSystem);
            }
        }
    }

    Ok(AbsorptionProfile {
        probabilities,
        class_count: l,
        anchor_x: anchor_x.to_vec(),
    })
}
