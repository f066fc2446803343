//! Built-in models covering every regime the library is checked against, plus
//! a registry for user-defined builders.
//!
//! All three built-ins share the particle picture: `n` one-dimensional
//! particles with velocities in `{-1, +1}`, consensus states `+e` and `-e`,
//! and slow dynamics `dX = a(X, V) dt`. Per-particle Poisson clocks of rate
//! `lambda` aggregate to an overall clock of rate `n * lambda`; at each event
//! one coordinate (uniform over `1..n`) attempts a flip.
//!
//! * `toy` — decoupled: flip accepted with a fixed probability (default 1/2),
//!   consensus states absorbing, drift `a(x, v) = v`.
//! * `coupled_navigation` — flips are biased toward the consensus nearer the
//!   current mean position: the flip of coordinate `i` toward sign `s` is
//!   accepted with probability `(1 + s h(x)) / 2`, `h(x) = tanh(beta mean(x))`.
//!   At `beta = 0` this is exactly the toy model. The per-row 1-norm modulus
//!   is `K0 = beta / n`: row differences telescope through `h`, which is
//!   `(beta / n)`-Lipschitz in the 1-norm.
//! * `ergodic_class_variant` — each absorbing consensus state is replaced by a
//!   closed 2-state class with symmetric internal mixing `p`; the companion
//!   state moves with the same heading scaled by `companion_drift`, so the
//!   averaged drift mixes the two in-class velocities.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::markov::{StateSpace, StochasticMatrix, TransitionFamily, TransitionRule};
use crate::sim::{DriftField, SlowFastModel};

/// Label of sign-vector state `idx`: character `j` is the sign of coordinate
/// `j + 1`, encoded in bit `j`.
pub fn sign_label(idx: usize, n: usize) -> String {
    (0..n)
        .map(|j| if idx >> j & 1 == 1 { '+' } else { '-' })
        .collect()
}

fn sign_velocity(idx: usize, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| if idx >> j & 1 == 1 { 1.0 } else { -1.0 })
        .collect()
}

fn check_particle_count(n: usize, max: usize) -> Result<()> {
    if n < 1 || n > max {
        return Err(Error::InvalidModel(format!(
            "particle count {n} outside 1..={max}"
        )));
    }
    Ok(())
}

fn check_rate(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidModel(format!("lambda {lambda} not positive")));
    }
    Ok(())
}

fn toy_matrix(n: usize, acceptance: f64) -> StochasticMatrix {
    let s = 1usize << n;
    let consensus_minus = 0;
    let consensus_plus = s - 1;
    let mut entries = vec![0.0; s * s];
    for v in 0..s {
        if v == consensus_minus || v == consensus_plus {
            entries[v * s + v] = 1.0;
            continue;
        }
        for j in 0..n {
            entries[v * s + (v ^ (1 << j))] += acceptance / n as f64;
        }
        entries[v * s + v] += 1.0 - acceptance;
    }
    StochasticMatrix::new(s, entries).expect("toy matrix construction")
}

/// Decoupled consensus model with the default flip acceptance 1/2.
pub fn build_toy(n: usize, lambda: f64) -> Result<SlowFastModel> {
    build_toy_with_acceptance(n, lambda, 0.5)
}

/// Decoupled consensus model with a configurable flip acceptance in `(0, 1]`.
pub fn build_toy_with_acceptance(
    n: usize,
    lambda: f64,
    acceptance: f64,
) -> Result<SlowFastModel> {
    check_particle_count(n, 10)?;
    check_rate(lambda)?;
    if !(acceptance > 0.0 && acceptance <= 1.0) {
        return Err(Error::InvalidModel(format!(
            "flip acceptance {acceptance} outside (0, 1]"
        )));
    }
    let s = 1usize << n;
    let labels = (0..s).map(|v| sign_label(v, n)).collect();
    let table: Vec<Vec<f64>> = (0..s).map(|v| sign_velocity(v, n)).collect();
    let mut invariant = vec![false; s];
    invariant[0] = true;
    invariant[s - 1] = true;

    Ok(SlowFastModel {
        name: "toy".into(),
        state_space: StateSpace::new(labels)?,
        family: TransitionFamily::constant(toy_matrix(n, acceptance)),
        drift: DriftField::from_state_table(table, n as f64),
        rate: n as f64 * lambda,
        clock_multiplicity: n as f64,
        dim: n,
        invariant_states: invariant,
        params: vec![
            ("n".into(), n.to_string()),
            ("lambda".into(), format!("{lambda:?}")),
            ("flip_acceptance".into(), format!("{acceptance:?}")),
        ],
    })
}

struct NavigationRule {
    n: usize,
    beta: f64,
}

impl NavigationRule {
    #[inline]
    fn bias(&self, x: &[f64]) -> f64 {
        let mean = x.iter().sum::<f64>() / self.n as f64;
        (self.beta * mean).tanh()
    }
}

impl TransitionRule for NavigationRule {
    fn dim(&self) -> usize {
        1 << self.n
    }

    fn matrix_at(&self, x: &[f64]) -> StochasticMatrix {
        let s = self.dim();
        let mut entries = vec![0.0; s * s];
        let mut row = vec![0.0; s];
        for v in 0..s {
            self.row_at(x, v, &mut row);
            entries[v * s..(v + 1) * s].copy_from_slice(&row);
        }
        StochasticMatrix::new(s, entries).expect("navigation matrix construction")
    }

    fn row_at(&self, x: &[f64], v: usize, out: &mut [f64]) {
        let s = self.dim();
        out.fill(0.0);
        if v == 0 || v == s - 1 {
            out[v] = 1.0;
            return;
        }
        let h = self.bias(x);
        let inv_n = 1.0 / self.n as f64;
        let mut flip_mass = 0.0;
        for j in 0..self.n {
            let toward_plus = v >> j & 1 == 0;
            let acc = if toward_plus {
                0.5 * (1.0 + h)
            } else {
                0.5 * (1.0 - h)
            };
            let w = acc * inv_n;
            out[v ^ (1 << j)] += w;
            flip_mass += w;
        }
        out[v] = 1.0 - flip_mass;
    }
}

/// Coupled navigation model: consensus states stay absorbing for every `x`,
/// while mixed-state flips are biased by the mean position. `beta = 0`
/// reduces exactly to the toy model.
pub fn build_coupled_navigation(n: usize, lambda: f64, beta: f64) -> Result<SlowFastModel> {
    check_particle_count(n, 8)?;
    check_rate(lambda)?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidModel(format!("beta {beta} must be >= 0")));
    }
    let s = 1usize << n;
    let labels = (0..s).map(|v| sign_label(v, n)).collect();
    let table: Vec<Vec<f64>> = (0..s).map(|v| sign_velocity(v, n)).collect();
    let mut invariant = vec![false; s];
    invariant[0] = true;
    invariant[s - 1] = true;

    let family = if beta == 0.0 {
        TransitionFamily::constant(toy_matrix(n, 0.5))
    } else {
        TransitionFamily::new(Arc::new(NavigationRule { n, beta }), beta / n as f64)
    };

    Ok(SlowFastModel {
        name: "coupled_navigation".into(),
        state_space: StateSpace::new(labels)?,
        family,
        drift: DriftField::from_state_table(table, n as f64),
        rate: n as f64 * lambda,
        clock_multiplicity: n as f64,
        dim: n,
        invariant_states: invariant,
        params: vec![
            ("n".into(), n.to_string()),
            ("lambda".into(), format!("{lambda:?}")),
            ("beta".into(), format!("{beta:?}")),
        ],
    })
}

/// Ergodic-class variant with the default companion drift factor 1/2.
pub fn build_ergodic_class_variant(n: usize, lambda: f64, mixing: f64) -> Result<SlowFastModel> {
    build_ergodic_class_variant_full(n, lambda, mixing, 0.5)
}

/// Ergodic-class variant: consensus singletons become closed 2-state classes
/// `{+e, +e'}` and `{-e, -e'}` with symmetric internal mixing `p`, and the
/// companion states move with velocity `companion_drift * (+-e)`.
pub fn build_ergodic_class_variant_full(
    n: usize,
    lambda: f64,
    mixing: f64,
    companion_drift: f64,
) -> Result<SlowFastModel> {
    check_particle_count(n, 10)?;
    check_rate(lambda)?;
    if !(mixing > 0.0 && mixing < 1.0) {
        return Err(Error::InvalidModel(format!(
            "intra-class mixing {mixing} outside (0, 1)"
        )));
    }
    if !companion_drift.is_finite() || companion_drift.abs() > 1.0 {
        return Err(Error::InvalidModel(format!(
            "companion drift {companion_drift} outside [-1, 1]"
        )));
    }
    let base = 1usize << n;
    let s = base + 2;
    let minus = 0;
    let plus = base - 1;
    let minus_companion = base;
    let plus_companion = base + 1;

    let mut labels: Vec<String> = (0..base).map(|v| sign_label(v, n)).collect();
    labels.push(format!("{}'", sign_label(minus, n)));
    labels.push(format!("{}'", sign_label(plus, n)));

    let mut entries = vec![0.0; s * s];
    for v in 0..base {
        if v == minus || v == plus {
            continue;
        }
        for j in 0..n {
            entries[v * s + (v ^ (1 << j))] += 0.5 / n as f64;
        }
        entries[v * s + v] += 0.5;
    }
    for (a, b) in [
        (minus, minus_companion),
        (minus_companion, minus),
        (plus, plus_companion),
        (plus_companion, plus),
    ] {
        entries[a * s + b] = mixing;
        entries[a * s + a] = 1.0 - mixing;
    }
    let matrix = StochasticMatrix::new(s, entries)?;

    let mut table: Vec<Vec<f64>> = (0..base).map(|v| sign_velocity(v, n)).collect();
    table.push(vec![-companion_drift; n]);
    table.push(vec![companion_drift; n]);

    Ok(SlowFastModel {
        name: "ergodic_class_variant".into(),
        state_space: StateSpace::new(labels)?,
        family: TransitionFamily::constant(matrix),
        drift: DriftField::from_state_table(table, n as f64),
        rate: n as f64 * lambda,
        clock_multiplicity: n as f64,
        dim: n,
        invariant_states: vec![false; s],
        params: vec![
            ("n".into(), n.to_string()),
            ("lambda".into(), format!("{lambda:?}")),
            ("mixing".into(), format!("{mixing:?}")),
            ("companion_drift".into(), format!("{companion_drift:?}")),
        ],
    })
}

/// Parameters a registry builder receives.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub name: String,
    pub n: usize,
    pub lambda: f64,
    pub beta: Option<f64>,
    pub mixing: Option<f64>,
    pub flip_acceptance: Option<f64>,
    pub companion_drift: Option<f64>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, n: usize, lambda: f64) -> Self {
        Self {
            name: name.into(),
            n,
            lambda,
            beta: None,
            mixing: None,
            flip_acceptance: None,
            companion_drift: None,
        }
    }
}

type Builder = Box<dyn Fn(&ModelSpec) -> Result<SlowFastModel> + Send + Sync>;

/// Name-keyed model builders; the three built-ins are pre-registered.
pub struct ModelRegistry {
    builders: HashMap<String, Builder>,
}

impl ModelRegistry {
    pub fn with_builtins() -> Self {
        let mut reg = Self {
            builders: HashMap::new(),
        };
        reg.register("toy", |spec| {
            build_toy_with_acceptance(spec.n, spec.lambda, spec.flip_acceptance.unwrap_or(0.5))
        });
        reg.register("coupled_navigation", |spec| {
            build_coupled_navigation(spec.n, spec.lambda, spec.beta.unwrap_or(0.0))
        });
        reg.register("ergodic_class_variant", |spec| {
            build_ergodic_class_variant_full(
                spec.n,
                spec.lambda,
                spec.mixing.unwrap_or(0.5),
                spec.companion_drift.unwrap_or(0.5),
            )
        });
        reg
    }

    pub fn register<F>(&mut self, name: &str, builder: F)
    where
        F: Fn(&ModelSpec) -> Result<SlowFastModel> + Send + Sync + 'static,
    {
        self.builders.insert(name.to_string(), Box::new(builder));
    }

    pub fn names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.builders.keys().map(String::as_str).collect();
        names.sort_unstable();
        names
    }

    pub fn build(&self, spec: &ModelSpec) -> Result<SlowFastModel> {
        let builder = self
            .builders
            .get(&spec.name)
            .ok_or_else(|| Error::InvalidModel(format!("unknown model name {:?}", spec.name)))?;
        let model = builder(spec)?;
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::decompose;

    #[test]
    fn toy_row_structure() {
        // mixed rows have exactly n single-flip targets plus self mass
        for n in 1..=4usize {
            let m = build_toy(n, 1.0).unwrap();
            let p = m.family.evaluate(&vec![0.0; n]);
            let s = 1 << n;
            for v in 1..s - 1 {
                let row = p.row(v);
                let off: Vec<usize> = (0..s).filter(|&w| w != v && row[w] > 0.0).collect();
                assert_eq!(off.len(), n, "state {v} in toy n={n}");
                for w in &off {
                    assert_eq!((v ^ w).count_ones(), 1);
                    assert!((row[*w] - 0.5 / n as f64).abs() < 1e-15);
                }
                assert!((row[v] - 0.5).abs() < 1e-15);
            }
            assert_eq!(p.row(0)[0], 1.0);
            assert_eq!(p.row(s - 1)[s - 1], 1.0);
        }
    }

    #[test]
    fn toy_rejects_out_of_range() {
        assert!(build_toy(0, 1.0).is_err());
        assert!(build_toy(11, 1.0).is_err());
        assert!(build_toy(2, 0.0).is_err());
        assert!(build_toy_with_acceptance(2, 1.0, 0.0).is_err());
        assert!(build_toy_with_acceptance(2, 1.0, 1.5).is_err());
    }

    #[test]
    fn toy_aggregated_rate() {
        let m = build_toy(3, 2.0).unwrap();
        assert_eq!(m.rate, 6.0);
        assert_eq!(m.clock_multiplicity, 3.0);
    }

    #[test]
    fn navigation_beta_zero_equals_toy() {
        let nav = build_coupled_navigation(2, 1.0, 0.0).unwrap();
        let toy = build_toy(2, 1.0).unwrap();
        for x in [[0.0, 0.0], [1.5, -0.5], [-3.0, 2.0]] {
            assert_eq!(nav.family.evaluate(&x), toy.family.evaluate(&x));
        }
        assert!(nav.family.constant_in_x());
    }

    #[test]
    fn navigation_rows_lipschitz_within_declared_bound() {
        let n = 3;
        let beta = 2.0;
        let m = build_coupled_navigation(n, 1.0, beta).unwrap();
        let k0 = m.family.lipschitz_bound();
        assert!((k0 - beta / n as f64).abs() < 1e-15);
        let xs: [Vec<f64>; 3] = [
            vec![0.0, 0.0, 0.0],
            vec![0.4, -0.1, 0.9],
            vec![-2.0, 1.0, 0.3],
        ];
        for a in &xs {
            for b in &xs {
                let dist: f64 = a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum();
                let pa = m.family.evaluate(a);
                let pb = m.family.evaluate(b);
                for v in 0..pa.dim() {
                    let diff: f64 = pa.row(v).iter().zip(pb.row(v)).map(|(p, q)| (p - q).abs()).sum();
                    assert!(diff <= k0 * dist + 1e-12);
                }
            }
        }
    }

    #[test]
    fn navigation_consensus_absorbing_everywhere() {
        let m = build_coupled_navigation(2, 1.0, 3.0).unwrap();
        for x in [[0.0, 0.0], [5.0, 5.0], [-5.0, 1.0], [0.1, -0.7]] {
            let p = m.family.evaluate(&x);
            assert_eq!(p.row(0)[0], 1.0);
            assert_eq!(p.row(3)[3], 1.0);
        }
    }

    #[test]
    fn navigation_bias_direction() {
        // positive mean position favours flips toward +1
        let m = build_coupled_navigation(2, 1.0, 2.0).unwrap();
        let p = m.family.evaluate(&[1.0, 1.0]);
        // from (+,-): flip of coordinate 2 (toward +) beats flip of coordinate 1
        assert!(p.entry(1, 3) > p.entry(1, 0));
    }

    #[test]
    fn ergodic_variant_structure() {
        let m = build_ergodic_class_variant(2, 1.0, 0.5).unwrap();
        let p = m.family.evaluate(&[0.0, 0.0]);
        let d = decompose(&p);
        assert_eq!(d.class_count(), 2);
        assert_eq!(d.classes()[0], vec![0, 4]); // {-e, -e'}
        assert_eq!(d.classes()[1], vec![3, 5]); // {+e, +e'}
        assert_eq!(d.transient_set(), &[1, 2]);
        // every intra-class entry positive: one step reaches both members
        for class in d.classes() {
            for &a in class {
                for &b in class {
                    assert!(p.entry(a, b) > 0.0);
                }
            }
        }
        assert_eq!(m.state_space.label(4), "--'");
        assert_eq!(m.state_space.label(5), "++'");
    }

    #[test]
    fn ergodic_variant_rejects_bad_mixing() {
        assert!(build_ergodic_class_variant(2, 1.0, 0.0).is_err());
        assert!(build_ergodic_class_variant(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn all_builtins_certify_on_five_point_grid() {
        use crate::markov::certify_assumptions;
        let grid: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0],
            vec![0.5, 0.5],
            vec![-0.5, 0.25],
            vec![1.0, -1.0],
            vec![0.1, 0.9],
        ];
        for model in [
            build_toy(2, 1.0).unwrap(),
            build_coupled_navigation(2, 1.0, 1.5).unwrap(),
            build_ergodic_class_variant(2, 1.0, 0.5).unwrap(),
        ] {
            let cert = certify_assumptions(&model.family, &grid, 64)
                .unwrap_or_else(|e| panic!("{}: {e}", model.name));
            assert!(cert.classes_stable, "{}", model.name);
            assert!(cert.z0 < 1.0);
        }
    }

    #[test]
    fn registry_builds_and_rejects() {
        let reg = ModelRegistry::with_builtins();
        assert_eq!(
            reg.names(),
            vec!["coupled_navigation", "ergodic_class_variant", "toy"]
        );
        let m = reg.build(&ModelSpec::new("toy", 2, 1.0)).unwrap();
        assert_eq!(m.name, "toy");
        let err = reg.build(&ModelSpec::new("nope", 2, 1.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)));
    }

    #[test]
    fn label_roundtrip() {
        let m = build_toy(3, 1.0).unwrap();
        assert_eq!(m.state_space.label(0), "---");
        assert_eq!(m.state_space.label(7), "+++");
        assert_eq!(m.state_space.index_of("++-"), Some(3));
    }
}
