//! The limiting law of the frozen process started at `(x, v)`.

use super::absorption::AbsorptionProfile;
use super::stationary::ClassStationaryLaw;
use crate::consts::MASS_TOL;
use crate::error::{Error, Result};

/// The measure `mu~_inf^(x,v)` on the full state space: mass
/// `q^(i)(x, v) * mu^(i)(x; w)` on each class state `w in E^(i)`, zero on
/// transient states.
#[derive(Debug, Clone)]
pub struct LimitLaw {
    pub measure: Vec<f64>,
    pub anchor_x: Vec<f64>,
    pub anchor_v: usize,
}

/// Assemble the limit law for start state `v` from an absorption profile and
/// the per-class stationary laws, which must share the same anchor.
pub fn limit_law(
    profile: &AbsorptionProfile,
    laws: &[ClassStationaryLaw],
    v: usize,
    dim: usize,
) -> Result<LimitLaw> {
    if laws.len() != profile.class_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} stationary laws for {} classes",
            laws.len(),
            profile.class_count()
        )));
    }
    for law in laws {
        if law.anchor_x != profile.anchor_x() {
            return Err(Error::AnchorMismatch);
        }
    }

    let mut measure = vec![0.0; dim];
    for (i, law) in laws.iter().enumerate() {
        let q = profile.q(v, i);
        for (&s, &w) in law.states.iter().zip(&law.weights) {
            measure[s] += q * w;
        }
    }

    let total: f64 = measure.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::DimensionMismatch(format!(
            "limit law mass {total} deviates from 1"
        )));
    }

    Ok(LimitLaw {
        measure,
        anchor_x: profile.anchor_x().to_vec(),
        anchor_v: v,
    })
}
