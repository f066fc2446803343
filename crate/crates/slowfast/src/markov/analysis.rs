//! One-shot chain analysis at a fixed slow state.

use super::absorption::{absorption_probabilities, AbsorptionProfile};
use super::decompose::{decompose, ChainDecomposition};
use super::family::TransitionFamily;
use super::limit::{limit_law, LimitLaw};
use super::matrix::StochasticMatrix;
use super::stationary::{stationary_law, ClassStationaryLaw};
use crate::error::Result;

/// Everything the rest of the library needs about the frozen chain at one
/// anchor: the matrix, its decomposition, absorption probabilities, and the
/// stationary law of every class.
#[derive(Debug, Clone)]
pub struct ChainAnalysis {
    pub anchor_x: Vec<f64>,
    pub matrix: StochasticMatrix,
    pub decomposition: ChainDecomposition,
    pub profile: AbsorptionProfile,
    pub laws: Vec<ClassStationaryLaw>,
}

impl ChainAnalysis {
    pub fn limit_law_from(&self, v: usize) -> Result<LimitLaw> {
        limit_law(&self.profile, &self.laws, v, self.matrix.dim())
    }
}

pub fn analyze_at(family: &TransitionFamily, x: &[f64]) -> Result<ChainAnalysis> {
    let matrix = family.evaluate(x);
    let decomposition = decompose(&matrix);
    let profile = absorption_probabilities(&matrix, &decomposition, x)?;
    let laws = (0..decomposition.class_count())
        .map(|i| stationary_law(&matrix, &decomposition, i, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainAnalysis {
        anchor_x: x.to_vec(),
        matrix,
        decomposition,
        profile,
        laws,
    })
}
