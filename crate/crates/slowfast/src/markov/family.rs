//! The map `x -> P_x` from slow states to transition matrices.

use std::sync::Arc;

use super::matrix::StochasticMatrix;

/// Evaluation rule behind a [`TransitionFamily`].
///
/// `row_at` exists so simulation kernels can fetch a single transition row
/// without materialising the full matrix at every jump; the default routes
/// through `matrix_at`.
pub trait TransitionRule: Send + Sync {
    fn dim(&self) -> usize;

    fn matrix_at(&self, x: &[f64]) -> StochasticMatrix;

    fn row_at(&self, x: &[f64], v: usize, out: &mut [f64]) {
        out.copy_from_slice(self.matrix_at(x).row(v));
    }
}

struct ConstantRule(StochasticMatrix);

impl TransitionRule for ConstantRule {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn matrix_at(&self, _x: &[f64]) -> StochasticMatrix {
        self.0.clone()
    }

    fn row_at(&self, _x: &[f64], v: usize, out: &mut [f64]) {
        out.copy_from_slice(self.0.row(v));
    }
}

/// Family `{P_x}` with its declared per-row 1-norm Lipschitz modulus `K0`:
/// `sum_w |P_x(v, w) - P_x'(v, w)| <= K0 ||x - x'||_1` for every row `v`.
#[derive(Clone)]
pub struct TransitionFamily {
    rule: Arc<dyn TransitionRule>,
    lipschitz_bound: f64,
    constant_in_x: bool,
}

impl TransitionFamily {
    pub fn new(rule: Arc<dyn TransitionRule>, lipschitz_bound: f64) -> Self {
        Self {
            rule,
            lipschitz_bound,
            constant_in_x: false,
        }
    }

    /// The decoupled case: one matrix for every `x`, `K0 = 0`.
    pub fn constant(matrix: StochasticMatrix) -> Self {
        Self {
            rule: Arc::new(ConstantRule(matrix)),
            lipschitz_bound: 0.0,
            constant_in_x: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.rule.dim()
    }

    pub fn evaluate(&self, x: &[f64]) -> StochasticMatrix {
        self.rule.matrix_at(x)
    }

    #[inline]
    pub fn row_into(&self, x: &[f64], v: usize, out: &mut [f64]) {
        self.rule.row_at(x, v, out);
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    pub fn constant_in_x(&self) -> bool {
        self.constant_in_x
    }
}

impl std::fmt::Debug for TransitionFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransitionFamily")
            .field("dim", &self.dim())
            .field("lipschitz_bound", &self.lipschitz_bound)
            .field("constant_in_x", &self.constant_in_x)
            .finish()
    }
}
