//! Exact (sampling-free) laws of the fast processes and total-variation
//! distances.
//!
//! The discrete-time chain law is iterated as `mu_{k+1}^T = mu_k^T P(k)`, with
//! `P(k)` either a fixed matrix (frozen process) or `P_{x^(k+1)}` along a
//! prescribed jump sequence. Continuous time enters through Poissonization:
//!
//! `mu_t = sum_k P[Poisson(rate * t) = k] mu_k`,
//!
//! truncated when the remaining Poisson tail mass falls below a tolerance and
//! renormalized. Total variation here is the unnormalized convention
//! `||mu - nu|| = sum_v |mu(v) - nu(v)|`, twice the measure-theoretic TV, so
//! that reported constants are directly comparable with the decay bounds.

use crate::consts::MASS_TOL;
use crate::error::{Error, Result};
use crate::markov::{AssumptionCertificate, StochasticMatrix, TransitionFamily};

/// Laws of the discrete-time chain after `k = 0, 1, ..` jumps.
#[derive(Debug, Clone)]
pub struct DiscreteLawTrajectory {
    laws: Vec<Vec<f64>>,
}

impl DiscreteLawTrajectory {
    pub fn law(&self, k: usize) -> &[f64] {
        &self.laws[k]
    }

    /// Number of stored laws (`k_max + 1`).
    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.laws[0].len()
    }
}

/// A fixed sequence of slow states feeding the sequence-driven process, with
/// its declared 1-norm ball.
#[derive(Debug, Clone)]
pub struct JumpSequence {
    points: Vec<Vec<f64>>,
    ball_center: Vec<f64>,
    ball_radius: f64,
}

impl JumpSequence {
    pub fn new(points: Vec<Vec<f64>>, ball_center: Vec<f64>, ball_radius: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("jump sequence must be nonempty".into()));
        }
        for (k, p) in points.iter().enumerate() {
            if p.len() != ball_center.len() {
                return Err(Error::DimensionMismatch(format!(
                    "sequence point {k} has {} coordinates, center has {}",
                    p.len(),
                    ball_center.len()
                )));
            }
            let dist: f64 = p
                .iter()
                .zip(&ball_center)
                .map(|(a, b)| (a - b).abs())
                .sum();
            if dist > ball_radius + 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "sequence point {k} at 1-norm distance {dist} leaves the declared ball {ball_radius}"
                )));
            }
        }
        Ok(Self {
            points,
            ball_center,
            ball_radius,
        })
    }

    /// Constant sequence sitting at a single point.
    pub fn constant(point: Vec<f64>, center: Vec<f64>, len: usize) -> Result<Self> {
        let radius: f64 = point
            .iter()
            .zip(&center)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Self::new(vec![point; len], center, radius)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k]
    }

    pub fn ball_center(&self) -> &[f64] {
        &self.ball_center
    }

    pub fn ball_radius(&self) -> f64 {
        self.ball_radius
    }

    /// Largest 1-norm distance from `x` over the sequence.
    pub fn sup_distance_from(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| p.iter().zip(x).map(|(a, b)| (a - b).abs()).sum())
            .fold(0.0f64, f64::max)
    }
}

/// Driver for the discrete-time iteration.
pub enum LawDriver<'a> {
    Frozen(&'a StochasticMatrix),
    Sequence {
        family: &'a TransitionFamily,
        sequence: &'a JumpSequence,
    },
}

/// Laws of the chain after `0..=k_max` jumps, exact up to floating point.
pub fn discrete_law(driver: &LawDriver, v0: usize, k_max: usize) -> Result<DiscreteLawTrajectory> {
    let dim = match driver {
        LawDriver::Frozen(p) => p.dim(),
        LawDriver::Sequence { family, .. } => family.dim(),
    };
    if v0 >= dim {
        return Err(Error::InvalidInput(format!("start state {v0} out of range")));
    }
    if let LawDriver::Sequence { sequence, .. } = driver {
        if sequence.len() < k_max {
            return Err(Error::SequenceTooShort {
                needed: k_max,
                have: sequence.len(),
            });
        }
    }

    let mut laws = Vec::with_capacity(k_max + 1);
    let mut mu = vec![0.0; dim];
    mu[v0] = 1.0;
    laws.push(mu.clone());
    let mut next = vec![0.0; dim];
    for k in 0..k_max {
        match driver {
            LawDriver::Frozen(p) => p.propagate(&mu, &mut next),
            LawDriver::Sequence { family, sequence } => {
                let p = family.evaluate(sequence.point(k));
                p.propagate(&mu, &mut next);
            }
        }
        std::mem::swap(&mut mu, &mut next);
        laws.push(mu.clone());
    }
    Ok(DiscreteLawTrajectory { laws })
}

/// Result of Poissonization: the renormalized time-`t` law, the index at which
/// the Poisson sum was truncated, and the discarded tail mass.
#[derive(Debug, Clone)]
pub struct Poissonized {
    pub law: Vec<f64>,
    pub truncation_index: usize,
    pub defect: f64,
}

/// Conservative trajectory length for Poisson mean `m`: covers the tail down
/// to ~1e-16 for any tolerance used in practice.
pub fn suggested_k_max(m: f64) -> usize {
    (m + 12.0 * (m + 1.0).sqrt() + 40.0).ceil() as usize
}

/// Poisson-mixture law `sum_k P[Poisson(rate t) = k] mu_k`, truncated once the
/// accumulated Poisson mass reaches `1 - tail_tol` and renormalized.
pub fn poissonize(
    traj: &DiscreteLawTrajectory,
    rate: f64,
    t: f64,
    tail_tol: f64,
) -> Result<Poissonized> {
    if !(t >= 0.0) || !(rate >= 0.0) {
        return Err(Error::InvalidInput("rate and t must be nonnegative".into()));
    }
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidInput("tail_tol must be positive".into()));
    }
    let m = rate * t;
    let dim = traj.dim();

    if m == 0.0 {
        return Ok(Poissonized {
            law: traj.law(0).to_vec(),
            truncation_index: 0,
            defect: 0.0,
        });
    }

    let ln_m = m.ln();
    let mut ln_w = -m; // ln P[K = 0]
    let mut cum = 0.0f64;
    let mut acc = vec![0.0f64; dim];
    let mut k = 0usize;
    loop {
        if k >= traj.len() {
            return Err(Error::TruncationInsufficient {
                needed: suggested_k_max(m),
                have: traj.len(),
                tail_tol,
            });
        }
        let w = ln_w.exp();
        if w > 0.0 {
            cum += w;
            for (a, &p) in acc.iter_mut().zip(traj.law(k)) {
                *a += w * p;
            }
        }
        if 1.0 - cum < tail_tol {
            break;
        }
        k += 1;
        ln_w += ln_m - (k as f64).ln();
    }
    let defect = 1.0 - cum;
    for a in &mut acc {
        *a /= cum;
    }
    Ok(Poissonized {
        law: acc,
        truncation_index: k,
        defect,
    })
}

/// Unnormalized total variation `sum_v |mu(v) - nu(v)|`.
pub fn tv_distance(mu: &[f64], nu: &[f64]) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::DimensionMismatch(format!(
            "TV of vectors with {} and {} states",
            mu.len(),
            nu.len()
        )));
    }
    Ok(mu.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum())
}

/// Gap between the frozen law at `x` and the sequence-driven law, both at time
/// `t`, together with the sup distance of the sequence from `x`.
#[derive(Debug, Clone)]
pub struct SequenceGap {
    pub gap: f64,
    pub sup_distance: f64,
    pub truncation_index: usize,
}

/// `||mu~_t^{lambda,x,v} - mu_t^{lambda,x,v,l}||_TV` via two Poissonizations.
///
/// Precondition (the stability ball): the sequence must stay within 1-norm
/// distance `(1 - z0) / (2 K0 n~)` of `x`, with `z0, n~` from the certificate
/// and `K0` the family's declared modulus.
#[allow(clippy::too_many_arguments)]
pub fn frozen_vs_sequence_gap(
    family: &TransitionFamily,
    certificate: &AssumptionCertificate,
    x: &[f64],
    v0: usize,
    sequence: &JumpSequence,
    rate: f64,
    t: f64,
    tail_tol: f64,
) -> Result<SequenceGap> {
    let sup = sequence.sup_distance_from(x);
    let radius = certificate.stability_ball_radius(family.lipschitz_bound());
    if sup > radius {
        return Err(Error::BallViolation { sup, radius });
    }

    let m = rate * t;
    let k_budget = suggested_k_max(m);
    let frozen_matrix = family.evaluate(x);
    let frozen_traj = discrete_law(&LawDriver::Frozen(&frozen_matrix), v0, k_budget)?;
    let frozen_law = poissonize(&frozen_traj, rate, t, tail_tol)?;

    let k_needed = frozen_law.truncation_index;
    if sequence.len() < k_needed {
        return Err(Error::SequenceTooShort {
            needed: k_needed,
            have: sequence.len(),
        });
    }
    let seq_traj = discrete_law(
        &LawDriver::Sequence { family, sequence },
        v0,
        k_needed,
    )?;
    let seq_law = poissonize(&seq_traj, rate, t, tail_tol)?;

    Ok(SequenceGap {
        gap: tv_distance(&frozen_law.law, &seq_law.law)?,
        sup_distance: sup,
        truncation_index: k_needed,
    })
}

/// Total mass a law places on the union of ergodic classes.
pub fn class_mass(law: &[f64], decomposition: &crate::markov::ChainDecomposition) -> f64 {
    law.iter()
        .enumerate()
        .filter(|(v, _)| !decomposition.is_transient(*v))
        .map(|(_, &p)| p)
        .sum()
}

/// Sanity check used by callers that assemble laws by hand.
pub fn check_probability_vector(law: &[f64]) -> Result<()> {
    let total: f64 = law.iter().sum();
    if (total - 1.0).abs() > MASS_TOL || law.iter().any(|&p| p < -MASS_TOL) {
        return Err(Error::InvalidInput(format!(
            "not a probability vector (mass {total})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_toy, build_toy_with_acceptance};

    fn toy2_matrix() -> StochasticMatrix {
        build_toy(2, 1.0).unwrap().family.evaluate(&[0.0, 0.0])
    }

    #[test]
    fn frozen_law_from_absorbing_state_is_constant() {
        let p = toy2_matrix();
        let traj = discrete_law(&LawDriver::Frozen(&p), 3, 10).unwrap();
        for k in 0..=10 {
            assert_eq!(traj.law(k), &[0.0, 0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn one_step_law_acceptance_one_splits_between_consensus() {
        // with acceptance 1 a single jump from (+,-) lands on a consensus
        // state: the two single-flip targets each carry mass 1/2
        let m = build_toy_with_acceptance(2, 1.0, 1.0).unwrap();
        let p = m.family.evaluate(&[0.0, 0.0]);
        let traj = discrete_law(&LawDriver::Frozen(&p), 1, 1).unwrap();
        assert_eq!(traj.law(1), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn one_step_law_default_acceptance_keeps_self_mass() {
        let p = toy2_matrix();
        let traj = discrete_law(&LawDriver::Frozen(&p), 1, 1).unwrap();
        assert_eq!(traj.law(1), &[0.25, 0.5, 0.0, 0.25]);
    }

    #[test]
    fn degenerate_sequence_matches_frozen() {
        let model = build_toy(2, 1.0).unwrap();
        let x = vec![0.4, -0.4];
        let p = model.family.evaluate(&x);
        let seq = JumpSequence::constant(x.clone(), x.clone(), 30).unwrap();
        let frozen = discrete_law(&LawDriver::Frozen(&p), 1, 30).unwrap();
        let driven = discrete_law(
            &LawDriver::Sequence {
                family: &model.family,
                sequence: &seq,
            },
            1,
            30,
        )
        .unwrap();
        for k in 0..=30 {
            assert_eq!(frozen.law(k), driven.law(k));
        }
    }

    #[test]
    fn sequence_too_short_detected() {
        let model = build_toy(2, 1.0).unwrap();
        let x = vec![0.0, 0.0];
        let seq = JumpSequence::constant(x.clone(), x, 5).unwrap();
        let err = discrete_law(
            &LawDriver::Sequence {
                family: &model.family,
                sequence: &seq,
            },
            1,
            6,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SequenceTooShort { .. }));
    }

    #[test]
    fn poissonize_zero_mean_is_initial_law() {
        let p = toy2_matrix();
        let traj = discrete_law(&LawDriver::Frozen(&p), 1, 5).unwrap();
        let out = poissonize(&traj, 2.0, 0.0, 1e-12).unwrap();
        assert_eq!(out.law, traj.law(0));
        assert_eq!(out.truncation_index, 0);
    }

    #[test]
    fn poissonize_matches_generating_function_identity() {
        // toy n=2 from (+,-): self mass decays as 2^-k, so the unabsorbed mass
        // at Poisson mean m is E[2^-K] = exp(-m/2) and the consensus states
        // carry (1 - exp(-m/2)) / 2 each
        let p = toy2_matrix();
        let m = 3.0;
        let traj = discrete_law(&LawDriver::Frozen(&p), 1, suggested_k_max(m)).unwrap();
        let out = poissonize(&traj, 3.0, 1.0, 1e-12).unwrap();
        let unabs = (-m / 2.0f64).exp();
        let cons = (1.0 - unabs) / 2.0;
        assert!((out.law[1] - unabs).abs() < 1e-11);
        assert!((out.law[0] - cons).abs() < 1e-11);
        assert!((out.law[3] - cons).abs() < 1e-11);
        assert_eq!(out.law[2], 0.0);
        assert!(out.defect <= 1e-12);
        check_probability_vector(&out.law).unwrap();
    }

    #[test]
    fn poissonize_large_mean_stable() {
        let p = toy2_matrix();
        let m = 2000.0;
        let traj = discrete_law(&LawDriver::Frozen(&p), 0, suggested_k_max(m)).unwrap();
        let out = poissonize(&traj, 2000.0, 1.0, 1e-12).unwrap();
        assert!((out.law[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_insufficient_reported() {
        let p = toy2_matrix();
        let traj = discrete_law(&LawDriver::Frozen(&p), 1, 3).unwrap();
        let err = poissonize(&traj, 50.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::TruncationInsufficient { .. }));
    }

    #[test]
    fn tv_conventions() {
        assert_eq!(tv_distance(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        // disjoint point masses have distance 2 in this convention
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert!(tv_distance(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn ball_violation_and_zero_gap() {
        let model = build_toy(2, 1.0).unwrap();
        let cert =
            crate::markov::certify_assumptions(&model.family, &[vec![0.0, 0.0]], 16).unwrap();
        let x = vec![0.0, 0.0];
        // constant family: K0 = 0, infinite ball, gap exactly zero
        let seq = JumpSequence::constant(vec![9.0, -9.0], x.clone(), 200).unwrap();
        let gap = frozen_vs_sequence_gap(&model.family, &cert, &x, 1, &seq, 2.0, 1.0, 1e-12)
            .unwrap();
        assert_eq!(gap.gap, 0.0);
        assert_eq!(gap.sup_distance, 18.0);

        // coupled family: finite ball, the same sequence violates it
        let nav = crate::models::build_coupled_navigation(2, 1.0, 1.5).unwrap();
        let cert_nav =
            crate::markov::certify_assumptions(&nav.family, &[vec![0.0, 0.0]], 16).unwrap();
        let err = frozen_vs_sequence_gap(&nav.family, &cert_nav, &x, 1, &seq, 2.0, 1.0, 1e-12)
            .unwrap_err();
        assert!(matches!(err, Error::BallViolation { .. }));
    }
}
