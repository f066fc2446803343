//! The assembled slow-fast model.

use super::drift::DriftField;
use crate::error::{Error, Result};
use crate::markov::{StateSpace, TransitionFamily};

/// A slow ODE in `R^dim` coupled to a fast chain on `state_space`, jumping at
/// the aggregated Poisson rate `rate`. For models built from per-particle
/// clocks the aggregation (e.g. `n * lambda`) has already been applied.
#[derive(Debug, Clone)]
pub struct SlowFastModel {
    pub name: String,
    pub state_space: StateSpace,
    pub family: TransitionFamily,
    pub drift: DriftField,
    pub rate: f64,
    /// Aggregation factor between the per-clock rate `lambda` and `rate`
    /// (`n` for models with one clock per particle).
    pub clock_multiplicity: f64,
    pub dim: usize,
    /// States `v` with `P_x(v, v) = 1` for every `x`, declared by the builder.
    /// Simulation endpoints may stop drawing jumps once such a state is hit.
    pub invariant_states: Vec<bool>,
    /// Builder parameters, for provenance records.
    pub params: Vec<(String, String)>,
}

impl SlowFastModel {
    pub fn validate(&self) -> Result<()> {
        let s = self.state_space.size();
        if self.family.dim() != s {
            return Err(Error::InvalidModel(format!(
                "family over {} states, state space has {s}",
                self.family.dim()
            )));
        }
        if self.drift.dim() != self.dim {
            return Err(Error::InvalidModel(format!(
                "drift dimension {} vs model dimension {}",
                self.drift.dim(),
                self.dim
            )));
        }
        if self.invariant_states.len() != s {
            return Err(Error::InvalidModel(
                "invariant-state flags misaligned with state space".into(),
            ));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::InvalidModel(format!("rate {} not positive", self.rate)));
        }
        Ok(())
    }

    /// FNV-1a hash of the model identity, for report provenance.
    pub fn provenance_hash(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.name.as_bytes());
        for (k, v) in &self.params {
            eat(k.as_bytes());
            eat(v.as_bytes());
        }
        eat(&self.rate.to_bits().to_le_bytes());
        for l in self.state_space.labels() {
            eat(l.as_bytes());
        }
        format!("{h:016x}")
    }
}
