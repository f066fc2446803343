//! Property tests for the chain-structure layer and the exact-law oracle.

use proptest::prelude::*;
use std::collections::BTreeSet;

use slowfast::law::{discrete_law, poissonize, suggested_k_max, LawDriver};
use slowfast::markov::{
    absorption_probabilities, decompose, stationary_weights, StochasticMatrix,
};

/// Random row-stochastic matrix with a controllable sparsity pattern.
fn stochastic_matrix(dim: usize) -> impl Strategy<Value = StochasticMatrix> {
    let row = prop::collection::vec((0u8..=2, 1e-3f64..1.0), dim);
    prop::collection::vec(row, dim).prop_map(move |rows| {
        let mut entries = Vec::with_capacity(dim * dim);
        for (v, row) in rows.iter().enumerate() {
            // kind 0 drops the entry, so patterns vary; keep at least a self loop
            let mut weights: Vec<f64> = row
                .iter()
                .map(|(kind, w)| if *kind == 0 { 0.0 } else { *w })
                .collect();
            if weights.iter().all(|&w| w == 0.0) {
                weights[v] = 1.0;
            }
            let total: f64 = weights.iter().sum();
            entries.extend(weights.iter().map(|w| w / total));
        }
        StochasticMatrix::new(dim, entries).expect("normalized rows")
    })
}

fn permutation(dim: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..dim).collect::<Vec<_>>()).prop_shuffle()
}

fn class_sets(classes: &[Vec<usize>]) -> BTreeSet<BTreeSet<usize>> {
    classes
        .iter()
        .map(|c| c.iter().copied().collect())
        .collect()
}

proptest! {
    #[test]
    fn decompose_is_relabeling_equivariant(
        (p, perm) in (2usize..=7).prop_flat_map(|d| (stochastic_matrix(d), permutation(d)))
    ) {
        let d_orig = decompose(&p);
        let d_perm = decompose(&p.relabel(&perm));

        // state i of the permuted matrix is state perm[i] of the original
        let mapped_classes: BTreeSet<BTreeSet<usize>> = d_perm
            .classes()
            .iter()
            .map(|c| c.iter().map(|&i| perm[i]).collect())
            .collect();
        prop_assert_eq!(mapped_classes, class_sets(d_orig.classes()));

        let mapped_transient: BTreeSet<usize> =
            d_perm.transient_set().iter().map(|&i| perm[i]).collect();
        let orig_transient: BTreeSet<usize> =
            d_orig.transient_set().iter().copied().collect();
        prop_assert_eq!(mapped_transient, orig_transient);
    }

    #[test]
    fn absorption_rows_are_probability_vectors(p in stochastic_matrix(6)) {
        let d = decompose(&p);
        let profile = absorption_probabilities(&p, &d, &[0.0]).unwrap();
        for v in 0..p.dim() {
            let row = profile.row(v);
            let total: f64 = row.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-10, "state {}: mass {}", v, total);
            for &q in row {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&q));
            }
            if let Some(c) = d.class_of(v) {
                prop_assert_eq!(row[c], 1.0);
            }
        }
    }

    #[test]
    fn stationary_matches_power_iteration_on_positive_chains(
        rows in prop::collection::vec(prop::collection::vec(1e-3f64..1.0, 5), 5)
    ) {
        // strictly positive rows: irreducible and aperiodic
        let dim = 5;
        let mut entries = Vec::with_capacity(dim * dim);
        for row in &rows {
            let total: f64 = row.iter().sum();
            entries.extend(row.iter().map(|w| w / total));
        }
        let p = StochasticMatrix::new(dim, entries).unwrap();
        let class: Vec<usize> = (0..dim).collect();
        let mu = stationary_weights(&p, &class).unwrap();

        // independent oracle: power iteration to a 1e-12 residual
        let mut law = vec![1.0 / dim as f64; dim];
        let mut next = vec![0.0; dim];
        for _ in 0..200_000 {
            p.propagate(&law, &mut next);
            let residual: f64 = law.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            std::mem::swap(&mut law, &mut next);
            if residual < 1e-13 {
                break;
            }
        }
        for (a, b) in mu.iter().zip(&law) {
            prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
        }
    }

    #[test]
    fn poissonize_outputs_probability_vectors(
        p in stochastic_matrix(5),
        v0 in 0usize..5,
        mean in 0.0f64..30.0,
    ) {
        let traj = discrete_law(&LawDriver::Frozen(&p), v0, suggested_k_max(mean)).unwrap();
        let out = poissonize(&traj, mean, 1.0, 1e-12).unwrap();
        let total: f64 = out.law.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!(out.law.iter().all(|&q| q >= 0.0));
        prop_assert!(out.defect <= 1e-12);
    }

    #[test]
    fn class_mass_monotone_in_time(p in stochastic_matrix(6), v0 in 0usize..6) {
        // absorbed mass only grows: classes are closed
        let d = decompose(&p);
        let traj = discrete_law(&LawDriver::Frozen(&p), v0, suggested_k_max(25.0)).unwrap();
        let mut last = -1.0;
        for step in 0..=25 {
            let law = poissonize(&traj, step as f64, 1.0, 1e-12).unwrap();
            let mass = slowfast::law::class_mass(&law.law, &d);
            prop_assert!(mass >= last - 1e-11, "mass dropped: {} -> {}", last, mass);
            last = mass;
        }
    }

    #[test]
    fn tv_distance_bounds(p in stochastic_matrix(5), v0 in 0usize..5, k in 0usize..20) {
        let traj = discrete_law(&LawDriver::Frozen(&p), v0, k).unwrap();
        let tv = slowfast::law::tv_distance(traj.law(0), traj.law(k)).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&tv));
    }
}
