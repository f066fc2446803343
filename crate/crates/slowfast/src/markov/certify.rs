//! Numeric certification of the standing assumptions on a transition family:
//! stable class structure across slow states, a geometric absorption bound,
//! and an empirical Lipschitz modulus.
//!
//! The absorption certificate is the pair `(n~, z0)` with
//! `max_x max_v P[V~_n~^(x,v) not in any class] <= z0 < 1`, where the
//! probability is computed exactly as the row sums of `(P^NA_x)^n~`. The
//! search takes a target `z0` and returns the smallest step count whose
//! survival mass falls strictly below it; the achieved mass is also recorded.

use super::decompose::{decompose, ChainDecomposition};
use super::family::TransitionFamily;
use crate::consts::DEFAULT_Z0_TARGET;
use crate::error::{Error, Result};

/// Certified structural facts about a family over a sample grid of slow states.
#[derive(Debug, Clone)]
pub struct AssumptionCertificate {
    /// Certified step count: survival after `n_tilde` steps is below `z0`.
    pub n_tilde: usize,
    /// Certified bound, strictly less than 1.
    pub z0: f64,
    /// Largest exact survival mass at `n_tilde` over the grid.
    pub achieved_bound: f64,
    /// Empirical `K0`: max per-row 1-norm difference ratio over grid pairs.
    pub lipschitz_estimate: f64,
    /// Whether the decomposition was identical at every grid point.
    pub classes_stable: bool,
    pub sample_grid: Vec<Vec<f64>>,
}

impl AssumptionCertificate {
    /// Radius of the 1-norm ball in which sequence-driven laws stay uniformly
    /// close to the frozen law: `(1 - z0) / (2 K0 n~)`. Infinite when the
    /// family does not depend on `x`.
    pub fn stability_ball_radius(&self, declared_k0: f64) -> f64 {
        if declared_k0 == 0.0 {
            f64::INFINITY
        } else {
            (1.0 - self.z0) / (2.0 * declared_k0 * self.n_tilde as f64)
        }
    }
}

/// Exact survival masses `P[V~_k not absorbed | start v]` for transient `v`:
/// iterates `u_{k+1} = Q u_k` with `u_0 = 1`, i.e. the row sums of `Q^k`.
fn survival_profile(q: &[f64], t: usize, steps: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut u = vec![1.0; t];
    out.push(u.clone());
    for _ in 0..steps {
        let mut next = vec![0.0; t];
        for r in 0..t {
            let mut s = 0.0;
            for c in 0..t {
                s += q[r * t + c] * u[c];
            }
            next[r] = s;
        }
        out.push(next.clone());
        u = next;
    }
    out
}

/// Unabsorbed-mass envelope data for one matrix: `max_v P[V~_k transient]`
/// for `k = 0..=steps`.
pub(crate) fn max_survival_by_step(
    p: &super::matrix::StochasticMatrix,
    d: &ChainDecomposition,
    steps: usize,
) -> Vec<f64> {
    let trans = d.transient_set();
    if trans.is_empty() {
        return vec![if false { 1.0 } else { 0.0 }; steps + 1];
    }
    let q = p.block(trans, trans);
    survival_profile(&q, trans.len(), steps)
        .into_iter()
        .map(|u| u.into_iter().fold(0.0f64, f64::max))
        .collect()
}

pub fn certify_assumptions(
    family: &TransitionFamily,
    grid: &[Vec<f64>],
    max_steps: usize,
) -> Result<AssumptionCertificate> {
    certify_with_target(family, grid, max_steps, DEFAULT_Z0_TARGET)
}

pub fn certify_with_target(
    family: &TransitionFamily,
    grid: &[Vec<f64>],
    max_steps: usize,
    z0_target: f64,
) -> Result<AssumptionCertificate> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("sample grid must be nonempty".into()));
    }
    if max_steps == 0 {
        return Err(Error::InvalidInput("max_steps must be at least 1".into()));
    }
    if !(0.0 < z0_target && z0_target < 1.0) {
        return Err(Error::InvalidInput(format!(
            "z0 target {z0_target} outside (0, 1)"
        )));
    }

    let matrices: Vec<_> = grid.iter().map(|x| family.evaluate(x)).collect();
    let decs: Vec<ChainDecomposition> = matrices.iter().map(decompose).collect();

    for (k, d) in decs.iter().enumerate().skip(1) {
        if d != &decs[0] {
            return Err(Error::ClassStructureVaries(format!(
                "grid point {} has {} classes / {} transients vs {} / {} at point 0",
                k,
                d.class_count(),
                d.transient_set().len(),
                decs[0].class_count(),
                decs[0].transient_set().len()
            )));
        }
    }

    // worst survival mass per step count, over the whole grid
    let mut worst = vec![0.0f64; max_steps + 1];
    for (p, d) in matrices.iter().zip(&decs) {
        for (k, s) in max_survival_by_step(p, d, max_steps).into_iter().enumerate() {
            worst[k] = worst[k].max(s);
        }
    }
    let n_tilde = (1..=max_steps)
        .find(|&k| worst[k] < z0_target)
        .ok_or(Error::NoAbsorptionBound {
            max_steps,
            target: z0_target,
        })?;

    let mut lipschitz_estimate = 0.0f64;
    let dim = family.dim();
    for i in 0..grid.len() {
        for j in (i + 1)..grid.len() {
            let dist: f64 = grid[i]
                .iter()
                .zip(&grid[j])
                .map(|(a, b)| (a - b).abs())
                .sum();
            if dist == 0.0 {
                continue;
            }
            for v in 0..dim {
                let diff: f64 = matrices[i]
                    .row(v)
                    .iter()
                    .zip(matrices[j].row(v))
                    .map(|(a, b)| (a - b).abs())
                    .sum();
                lipschitz_estimate = lipschitz_estimate.max(diff / dist);
            }
        }
    }

    Ok(AssumptionCertificate {
        n_tilde,
        z0: z0_target,
        achieved_bound: worst[n_tilde],
        lipschitz_estimate,
        classes_stable: true,
        sample_grid: grid.to_vec(),
    })
}
