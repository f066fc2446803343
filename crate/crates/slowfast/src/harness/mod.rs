//! Experiment driver: quantitative, repeatable checks of the averaging limits,
//! with report types that render deterministically.

pub mod acceptance;
mod decay;
mod seqgap;
mod weak_error;

pub use decay::{fast_decay_experiment, DecayPoint, DecayReport};
pub use seqgap::{
    coupled_marginal_distance_at_t0, sequence_gap_experiment, SeqGapPoint, SequenceGapReport,
    T0Point,
};
pub use weak_error::{weak_error_experiment, AveragedSide, WeakErrorPoint, WeakErrorReport};
