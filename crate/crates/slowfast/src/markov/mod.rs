//! Finite-state Markov chain structure: representation, decomposition into
//! ergodic classes and transient states, absorption and stationary solvers,
//! and numeric certification of the standing assumptions.

mod absorption;
mod analysis;
mod certify;
mod decompose;
mod family;
mod limit;
pub(crate) mod linalg;
mod matrix;
mod state;
mod stationary;

pub use absorption::{absorption_probabilities, AbsorptionProfile};
pub use analysis::{analyze_at, ChainAnalysis};
pub(crate) use certify::max_survival_by_step;
pub use certify::{certify_assumptions, certify_with_target, AssumptionCertificate};
pub use decompose::{decompose, ChainDecomposition};
pub use family::{TransitionFamily, TransitionRule};
pub use limit::{limit_law, LimitLaw};
pub use matrix::StochasticMatrix;
pub use state::StateSpace;
pub use stationary::{stationary_law, stationary_weights, ClassStationaryLaw};
