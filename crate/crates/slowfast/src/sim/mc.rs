//! Monte Carlo wrapper: independent replicas on counter-based streams with
//! order-fixed aggregation, so results do not depend on thread scheduling.

use super::kernel::{check_jump_budget, coupled_endpoint, frozen_endpoint, RkScratch};
use super::model::SlowFastModel;
use super::rng::ReplicaRng;
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::stats::{mean_var, MeanVar};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Run `m` replicas keyed by `(seed, replica index)` and collect the results
/// in replica order. With the `parallel` feature the replicas execute on the
/// rayon pool; the output vector is identical either way.
pub fn run_replicas<T, F>(m: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, ReplicaRng) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..m as u64)
            .into_par_iter()
            .map(|i| f(i, ReplicaRng::new(seed, i)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..m as u64).map(|i| f(i, ReplicaRng::new(seed, i))).collect()
    }
}

/// Sequential reference implementation of [`run_replicas`], kept available in
/// every build for benchmarking the parallel bridge against it.
pub fn run_replicas_sequential<T, F>(m: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, ReplicaRng) -> T + Sync,
{
    (0..m as u64).map(|i| f(i, ReplicaRng::new(seed, i))).collect()
}

/// Sample mean / variance summary of `f(X_t)` over replicas.
#[derive(Debug, Clone, Copy)]
pub struct McStats {
    pub mean: f64,
    pub variance: f64,
    pub se: f64,
    pub m: usize,
}

impl From<MeanVar> for McStats {
    fn from(mv: MeanVar) -> Self {
        McStats {
            mean: mv.mean,
            variance: mv.variance,
            se: (mv.variance / mv.n as f64).sqrt(),
            m: mv.n,
        }
    }
}

/// Monte Carlo estimate of `E[f(X_t_end)]` for the coupled process.
pub fn mc_observable_mean(
    model: &SlowFastModel,
    x0: &[f64],
    v0: usize,
    t_end: f64,
    h: f64,
    observable: &Observable,
    m: usize,
    seed: u64,
) -> Result<McStats> {
    model.validate()?;
    check_jump_budget(model.rate, t_end)?;
    if m == 0 {
        return Err(Error::InvalidInput("need at least one replica".into()));
    }
    let dim = model.dim;
    let n_states = model.state_space.size();
    let values = run_replicas(m, seed, |_i, mut rng| {
        let mut scratch = RkScratch::new(dim);
        let mut row = vec![0.0; n_states];
        let ep = coupled_endpoint(model, x0, v0, t_end, h, &mut rng, &mut scratch, &mut row);
        observable.eval(&ep.x)
    });
    Ok(mean_var(&values).into())
}

/// Occupancy counts of the frozen fast process at time `t` over `m` replicas.
pub fn mc_fast_marginal_frozen(
    model: &SlowFastModel,
    x_frozen: &[f64],
    v0: usize,
    t: f64,
    m: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    model.validate()?;
    check_jump_budget(model.rate, t)?;
    let matrix = model.family.evaluate(x_frozen);
    let states = run_replicas(m, seed, |_i, mut rng| {
        frozen_endpoint(&matrix, model.rate, v0, t, &mut rng)
    });
    let mut counts = vec![0u64; model.state_space.size()];
    for s in states {
        counts[s] += 1;
    }
    Ok(counts)
}

/// Occupancy counts of the coupled fast marginal `V_t` over `m` replicas.
pub fn mc_fast_marginal_coupled(
    model: &SlowFastModel,
    x0: &[f64],
    v0: usize,
    t: f64,
    h: f64,
    m: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    model.validate()?;
    check_jump_budget(model.rate, t)?;
    let dim = model.dim;
    let n_states = model.state_space.size();
    let states = run_replicas(m, seed, |_i, mut rng| {
        let mut scratch = RkScratch::new(dim);
        let mut row = vec![0.0; n_states];
        coupled_endpoint(model, x0, v0, t, h, &mut rng, &mut scratch, &mut row).v
    });
    let mut counts = vec![0u64; n_states];
    for s in states {
        counts[s] += 1;
    }
    Ok(counts)
}

/// Empirical class-absorption counts of the embedded jump chain from `v0`.
pub fn mc_absorption_counts(
    matrix: &crate::markov::StochasticMatrix,
    decomposition: &crate::markov::ChainDecomposition,
    v0: usize,
    m: usize,
    seed: u64,
) -> Vec<u64> {
    let hits = run_replicas(m, seed, |_i, mut rng| {
        let mut v = v0;
        let mut steps = 0u64;
        loop {
            if let Some(c) = decomposition.class_of(v) {
                return c;
            }
            v = rng.categorical(matrix.row(v));
            steps += 1;
            assert!(steps < 100_000_000, "jump chain failed to absorb");
        }
    });
    let mut counts = vec![0u64; decomposition.class_count()];
    for c in hits {
        counts[c] += 1;
    }
    counts
}
