//! Simulation and analysis of slow-fast systems in which a slow ODE in `R^N`
//! is driven by a fast continuous-time Markov process on a finite state space
//! whose frozen chain has multiple ergodic classes.
//!
//! The library is organised around four layers:
//!
//! * [`markov`] — finite-chain structure: stochastic matrices, the
//!   decomposition into ergodic classes and transient states, absorption
//!   probabilities, per-class stationary laws, the assembled limit law, and
//!   numeric certification of the standing assumptions.
//! * [`law`] — exact (sampling-free) time-`t` laws of the frozen and
//!   sequence-driven fast processes via Poissonization, plus total-variation
//!   distances. This is the brute-force oracle the simulators are checked
//!   against.
//! * [`sim`] — event-driven trajectory simulation of the coupled, frozen,
//!   sequence-driven and averaged (random-ODE) processes, with reproducible
//!   counter-based random streams and a Monte Carlo wrapper.
//! * [`harness`] — experiments that turn the averaging limits into quantitative
//!   checks: weak-error decay in the clock rate, exponential decay of the
//!   frozen law, sequence-gap linearity, and the acceptance suite.
//!
//! Replica-level parallelism uses rayon when the `parallel` feature (default)
//! is enabled; aggregation is order-fixed so results are bit-identical with
//! the sequential fallback.

pub mod consts;
pub mod error;
pub mod export;
pub mod harness;
pub mod law;
pub mod markov;
pub mod models;
pub mod observable;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use markov::{
    absorption_probabilities, analyze_at, certify_assumptions, certify_with_target, decompose,
    limit_law, stationary_law, stationary_weights, AbsorptionProfile, AssumptionCertificate,
    ChainAnalysis, ChainDecomposition, ClassStationaryLaw, LimitLaw, StateSpace, StochasticMatrix,
    TransitionFamily, TransitionRule,
};
pub use models::{
    build_coupled_navigation, build_ergodic_class_variant, build_toy, build_toy_with_acceptance,
    ModelRegistry, ModelSpec,
};
pub use observable::Observable;
pub use sim::{
    averaged_drift, mc_observable_mean, simulate_averaged, simulate_coupled, simulate_frozen,
    simulate_sequence_driven, AveragedRealization, DriftField, MeasureMode, ReplicaRng,
    SlowFastModel, Trajectory,
};
