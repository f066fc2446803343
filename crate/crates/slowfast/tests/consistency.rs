//! Statistical consistency of the simulators against the exact oracles, and
//! the remaining numeric invariants. All runs are seeded and deterministic.

use slowfast::harness::fast_decay_experiment;
use slowfast::law::{discrete_law, poissonize, suggested_k_max, JumpSequence, LawDriver};
use slowfast::markov::{analyze_at, decompose, StochasticMatrix};
use slowfast::models::{build_coupled_navigation, build_ergodic_class_variant, build_toy};
use slowfast::sim::{
    mc_absorption_counts, mc_fast_marginal_coupled, mc_fast_marginal_frozen, run_replicas,
    simulate_averaged, simulate_coupled, simulate_frozen, simulate_sequence_driven, DriftField,
    MeasureMode, SlowFastModel,
};
use slowfast::stats::{chi2_gof_poisson, ks_two_sample};
use slowfast::{Observable, ReplicaRng};

/// Random 8-state chain with two absorbing states and leaky transients.
fn random_absorbing_chain(seed: u64) -> StochasticMatrix {
    let mut rng = ReplicaRng::new(seed, 0);
    let dim = 8;
    let mut entries = vec![0.0; dim * dim];
    entries[0] = 1.0;
    entries[dim * dim - 1] = 1.0;
    for v in 1..dim - 1 {
        let mut weights = vec![0.0f64; dim];
        for _ in 0..3 {
            let w = (rng.next_u64() % dim as u64) as usize;
            weights[w] += rng.unit() + 0.05;
        }
        // guarantee an escape route toward one absorbing state
        weights[if v % 2 == 0 { 0 } else { dim - 1 }] += 0.2;
        let total: f64 = weights.iter().sum();
        for (e, w) in entries[v * dim..(v + 1) * dim].iter_mut().zip(&weights) {
            *e = w / total;
        }
    }
    StochasticMatrix::new(dim, entries).unwrap()
}

#[test]
fn absorption_profile_matches_monte_carlo_on_random_chains() {
    for seed in [11u64, 12, 13] {
        let p = random_absorbing_chain(seed);
        let d = decompose(&p);
        let profile =
            slowfast::markov::absorption_probabilities(&p, &d, &[0.0]).unwrap();
        let m = 100_000;
        for &v in d.transient_set() {
            let counts = mc_absorption_counts(&p, &d, v, m, seed.wrapping_mul(97));
            for c in 0..d.class_count() {
                let q = profile.q(v, c);
                let phat = counts[c] as f64 / m as f64;
                let sigma = (q * (1.0 - q) / m as f64).sqrt().max(1e-9);
                assert!(
                    (phat - q).abs() <= 3.0 * sigma,
                    "seed {seed} state {v} class {c}: {phat} vs {q}"
                );
            }
        }
    }
}

#[test]
fn frozen_absorption_frequency_matches_profile_toy() {
    let model = build_toy(2, 4.0).unwrap();
    let x = vec![0.0, 0.0];
    let analysis = analyze_at(&model.family, &x).unwrap();
    let m = 100_000;
    // run the frozen process long enough that absorption is near certain
    let counts = mc_fast_marginal_frozen(&model, &x, 1, 8.0, m, 5151).unwrap();
    let q0 = analysis.profile.q(1, 0);
    let phat = counts[0] as f64 / m as f64;
    let sigma = (q0 * (1.0 - q0) / m as f64).sqrt();
    assert!(
        (phat - q0).abs() < 3.0 * sigma + 1e-4,
        "absorbed fraction {phat} vs {q0}"
    );
}

#[test]
fn constant_sequence_distributionally_matches_frozen() {
    // KS test on absorption times over 1e4 runs, p > 0.01
    let model = build_coupled_navigation(2, 3.0, 1.5).unwrap();
    let x = vec![0.3, 0.1];
    let t_end = 6.0;
    let absorption_time = |traj: &slowfast::Trajectory| -> f64 {
        for (k, &v) in traj.fast.iter().enumerate() {
            if v == 0 || v == 3 {
                return traj.times[k];
            }
        }
        t_end
    };
    let n = 10_000;
    let frozen: Vec<f64> = (0..n)
        .map(|i| absorption_time(&simulate_frozen(&model, &x, 1, t_end, 900, i).unwrap()))
        .collect();
    let seq = JumpSequence::constant(x.clone(), x.clone(), 400).unwrap();
    let driven: Vec<f64> = (0..n)
        .map(|i| {
            absorption_time(
                &simulate_sequence_driven(&model, 1, &seq, t_end, 901, i + n).unwrap(),
            )
        })
        .collect();
    let ks = ks_two_sample(&frozen, &driven);
    assert!(ks.p_value > 0.01, "KS {ks:?}");
}

#[test]
fn recorded_coupled_path_replays_identically_as_sequence() {
    // one-draw coupling: feeding the coupled run's own jump-time slow states
    // back as a sequence under the same stream reproduces the fast path
    let model = build_coupled_navigation(2, 6.0, 2.0).unwrap();
    let x0 = vec![0.4, -0.2];
    let t_end = 2.0;
    let (seed, stream) = (77, 3);
    let traj = simulate_coupled(&model, &x0, 1, t_end, 1e-4, t_end, seed, stream).unwrap();

    let jump_states: Vec<Vec<f64>> = traj
        .times
        .iter()
        .zip(&traj.slow)
        .zip(&traj.jumped)
        .filter(|(_, &j)| j)
        .map(|((_, x), _)| x.clone())
        .collect();
    assert_eq!(jump_states.len(), traj.jump_times.len());
    let radius = model.drift.sup_bound() * t_end + 1.0;
    let seq = JumpSequence::new(jump_states, x0.clone(), radius).unwrap();

    let replay = simulate_sequence_driven(&model, 1, &seq, t_end, seed, stream).unwrap();
    assert_eq!(replay.jump_times, traj.jump_times);
    let coupled_fast_at_jumps: Vec<usize> = traj
        .jumped
        .iter()
        .zip(&traj.fast)
        .filter(|(&j, _)| j)
        .map(|(_, &v)| v)
        .collect();
    let replay_fast_at_jumps: Vec<usize> = replay
        .jumped
        .iter()
        .zip(&replay.fast)
        .filter(|(&j, _)| j)
        .map(|(_, &v)| v)
        .collect();
    assert_eq!(coupled_fast_at_jumps, replay_fast_at_jumps);
}

#[test]
fn jump_counts_follow_poisson_law() {
    // chi-squared goodness of fit at significance 0.01 over 1e4 replicas;
    // the ergodic variant never absorbs, so no jumps are short-circuited
    let model = build_ergodic_class_variant(2, 3.0, 0.5).unwrap();
    let t_end = 1.5;
    let counts: Vec<u64> = run_replicas(10_000, 4242, |_i, mut rng| {
        let mut t = 0.0;
        let mut jumps = 0u64;
        loop {
            t += rng.exp(model.rate);
            if t >= t_end {
                return jumps;
            }
            jumps += 1;
        }
    });
    let gof = chi2_gof_poisson(&counts, model.rate * t_end);
    assert!(gof.p_value > 0.01, "{gof:?}");

    // and the full kernel's trajectory reports every event
    let counts_kernel: Vec<u64> = (0..10_000)
        .map(|i| {
            simulate_frozen(&model, &[0.0, 0.0], 1, t_end, 4243, i)
                .unwrap()
                .jump_times
                .len() as u64
        })
        .collect();
    let gof_kernel = chi2_gof_poisson(&counts_kernel, model.rate * t_end);
    assert!(gof_kernel.p_value > 0.01, "{gof_kernel:?}");
}

#[test]
fn sequence_driven_histogram_matches_poissonization() {
    // a genuinely inhomogeneous driver: constant sequence away from the
    // frozen anchor; its law is the frozen law at the shifted point
    let model = build_coupled_navigation(2, 2.0, 1.5).unwrap();
    let x_shift = vec![0.35, 0.05];
    let t = 0.9;
    let m = 100_000;
    let seq = JumpSequence::constant(x_shift.clone(), x_shift.clone(), 200).unwrap();
    let states: Vec<usize> = run_replicas(m, 808, |i, _rng| {
        simulate_sequence_driven(&model, 1, &seq, t, 808, i)
            .unwrap()
            .endpoint_fast()
    });
    let mut counts = vec![0u64; 4];
    for s in states {
        counts[s] += 1;
    }
    let matrix = model.family.evaluate(&x_shift);
    let mean = model.rate * t;
    let traj = discrete_law(&LawDriver::Frozen(&matrix), 1, suggested_k_max(mean)).unwrap();
    let exact = poissonize(&traj, model.rate, t, 1e-12).unwrap();
    for (state, (&c, &pth)) in counts.iter().zip(&exact.law).enumerate() {
        let phat = c as f64 / m as f64;
        let sigma = (pth * (1.0 - pth) / m as f64).sqrt();
        if sigma == 0.0 {
            assert_eq!(phat, pth, "state {state}");
        } else {
            assert!(
                (phat - pth).abs() <= 3.0 * sigma,
                "state {state}: {phat} vs {pth}"
            );
        }
    }
}

#[test]
fn single_class_averaged_process_is_deterministic() {
    // L = 1: zeta is degenerate and every realization follows the one
    // classical averaged ODE
    let p = StochasticMatrix::from_rows(vec![vec![0.7, 0.3], vec![0.1, 0.9]]).unwrap();
    let model = SlowFastModel {
        name: "two_state".into(),
        state_space: slowfast::StateSpace::new(vec!["a".into(), "b".into()]).unwrap(),
        family: slowfast::TransitionFamily::constant(p),
        drift: DriftField::from_state_table(vec![vec![1.0], vec![-1.0]], 1.0),
        rate: 5.0,
        clock_multiplicity: 1.0,
        dim: 1,
        invariant_states: vec![false, false],
        params: vec![],
    };
    let base = analyze_at(&model.family, &[0.0]).unwrap();
    assert_eq!(base.decomposition.class_count(), 1);
    let mut endpoints = Vec::new();
    for stream in 0..10 {
        for v0 in 0..2 {
            let r = simulate_averaged(
                &model,
                &base,
                &[0.0],
                v0,
                2.0,
                1e-3,
                2.0,
                55,
                stream,
                MeasureMode::StateDependent,
            )
            .unwrap();
            assert_eq!(r.zeta, 0);
            endpoints.push(r.endpoint()[0]);
        }
    }
    // averaged drift is 0.25 - 0.75 = -0.5, so the endpoint is -1 for all
    for e in endpoints {
        assert!((e + 1.0).abs() < 1e-12);
    }
}

#[test]
fn coupled_fast_marginal_matches_poissonization_for_decoupled_family() {
    let model = build_toy(2, 2.0).unwrap();
    let x = vec![0.0, 0.0];
    let t = 0.8;
    let m = 100_000;
    let counts = mc_fast_marginal_coupled(&model, &x, 1, t, 1e-3, m, 616).unwrap();
    let matrix = model.family.evaluate(&x);
    let mean = model.rate * t;
    let traj = discrete_law(&LawDriver::Frozen(&matrix), 1, suggested_k_max(mean)).unwrap();
    let exact = poissonize(&traj, model.rate, t, 1e-12).unwrap();
    for (state, (&c, &pth)) in counts.iter().zip(&exact.law).enumerate() {
        let phat = c as f64 / m as f64;
        let sigma = (pth * (1.0 - pth) / m as f64).sqrt();
        if sigma == 0.0 {
            assert_eq!(phat, pth, "state {state}");
        } else {
            assert!(
                (phat - pth).abs() <= 3.0 * sigma,
                "state {state}: {phat} vs {pth}"
            );
        }
    }
}

#[test]
fn poissonize_cross_checked_against_large_histogram() {
    // the exact-law oracle itself, validated by brute force sampling at a
    // million replicas (toy n=2, Poisson mean 3)
    let model = build_toy(2, 1.5).unwrap();
    let x = vec![0.0, 0.0];
    let t = 1.0; // rate * t = 3
    let m = 1_000_000;
    let counts = mc_fast_marginal_frozen(&model, &x, 1, t, m, 31337).unwrap();
    let matrix = model.family.evaluate(&x);
    let traj = discrete_law(&LawDriver::Frozen(&matrix), 1, suggested_k_max(3.0)).unwrap();
    let exact = poissonize(&traj, model.rate, t, 1e-12).unwrap();
    for (state, (&c, &pth)) in counts.iter().zip(&exact.law).enumerate() {
        let phat = c as f64 / m as f64;
        let sigma = (pth * (1.0 - pth) / m as f64).sqrt();
        if sigma > 0.0 {
            assert!(
                (phat - pth).abs() <= 4.0 * sigma,
                "state {state}: {phat} vs {pth}"
            );
        }
    }
}

#[test]
fn rk4_observed_order_at_least_three_and_a_half() {
    // smooth nonlinear drift, halving h: error should shrink ~16x per halving
    let drift = DriftField::from_fn(2, 3.0, |x, _v, out| {
        out[0] = (x[1]).sin() + 0.3 * x[0] * (1.0 - x[0]);
        out[1] = (x[0]).cos() - 0.2 * x[1];
    });
    let run = |h: f64| -> Vec<f64> {
        let mut x = vec![0.4, -0.3];
        let mut scratch_model = build_toy(2, 1.0).unwrap();
        scratch_model.drift = drift.clone();
        scratch_model.rate = 1e-15; // no jumps: pure ODE
        let traj =
            simulate_coupled(&scratch_model, &x, 1, 2.0, h, 2.0, 1, 0).unwrap();
        x = traj.endpoint_slow().unwrap().to_vec();
        x
    };
    let hs = [0.1, 0.05, 0.025, 0.0125];
    let sols: Vec<Vec<f64>> = hs.iter().map(|&h| run(h)).collect();
    let diff = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum()
    };
    let d1 = diff(&sols[0], &sols[1]);
    let d2 = diff(&sols[1], &sols[2]);
    let d3 = diff(&sols[2], &sols[3]);
    let order1 = (d1 / d2).log2();
    let order2 = (d2 / d3).log2();
    assert!(
        order1 >= 3.5 && order2 >= 3.5,
        "observed orders {order1:.2}, {order2:.2} (diffs {d1:e}, {d2:e}, {d3:e})"
    );
}

#[test]
fn averaged_expectation_matches_branch_enumeration() {
    // E[f(X_bar_t)] = q f(x - t e) + (1 - q) f(x + t e) for the toy model;
    // sampling zeta over replicas converges to the enumerated value
    let model = build_toy(2, 1.0).unwrap();
    let x0 = vec![0.25, 0.0];
    let t = 1.0;
    let base = analyze_at(&model.family, &x0).unwrap();
    let q = base.profile.q(1, 0);
    let f = Observable::TanhCoordinate(0);
    let enumerated =
        q * f.eval(&[x0[0] - t, x0[1] - t]) + (1.0 - q) * f.eval(&[x0[0] + t, x0[1] + t]);

    let m = 200_000;
    let vals: Vec<f64> = (0..m)
        .map(|i| {
            let r = simulate_averaged(
                &model,
                &base,
                &x0,
                1,
                t,
                1e-3,
                t,
                2024,
                i,
                MeasureMode::StateDependent,
            )
            .unwrap();
            f.eval(r.endpoint())
        })
        .collect();
    let mean = slowfast::stats::mean_var(&vals).mean;
    let se = (slowfast::stats::mean_var(&vals).variance / m as f64).sqrt();
    assert!(
        (mean - enumerated).abs() < 4.0 * se,
        "sampled {mean} vs enumerated {enumerated} (se {se})"
    );
}

#[test]
fn decay_fit_quality_on_grid() {
    // spec property: log TV vs lambda t over 1..20 fits with R^2 >= 0.95
    let model = build_toy(2, 1.0).unwrap();
    let grid: Vec<(f64, f64)> = (1..=20).map(|k| (k as f64, 1.0)).collect();
    let report = fast_decay_experiment(&model, &[0.0, 0.0], "+-", &grid).unwrap();
    assert!(report.r2 >= 0.95);
    assert!(report.c1_hat > 0.0);
}

#[test]
fn coupled_marginal_at_proof_timescale_shrinks_in_lambda() {
    // the distance of the coupled fast marginal at t0 = 1/sqrt(lambda) from
    // the frozen limit law decays as lambda grows
    use slowfast::harness::coupled_marginal_distance_at_t0;
    let builder = |lambda: f64| build_coupled_navigation(2, lambda, 0.5);
    let points = coupled_marginal_distance_at_t0(
        &builder,
        &[1.0, 0.0],
        "+-",
        &[4.0, 16.0, 64.0],
        1e-3,
        20_000,
        2211,
    )
    .unwrap();
    assert!(
        points[0].tv_to_limit > points[1].tv_to_limit
            && points[1].tv_to_limit > points[2].tv_to_limit,
        "{points:?}"
    );
    assert!(points[2].tv_to_limit < 0.05);
}

fn degenerate_rate_model() -> SlowFastModel {
    let mut m = build_toy(2, 1.0).unwrap();
    m.rate = 2e9;
    m
}

#[test]
fn resource_guard_rejects_degenerate_jump_budgets() {
    let m = degenerate_rate_model();
    let err = simulate_coupled(&m, &[0.0, 0.0], 1, 1.0, 1e-4, 0.5, 1, 0).unwrap_err();
    assert!(matches!(err, slowfast::Error::ResourceLimit(_)));
}
