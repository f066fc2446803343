//! Event-driven trajectory simulation of the coupled, frozen, sequence-driven
//! and averaged processes.

mod averaged;
mod drift;
mod kernel;
mod mc;
mod model;
mod rng;

pub use averaged::{
    averaged_branch_path, averaged_drift, simulate_averaged, AveragedRealization, MeasureMode,
};
pub use drift::DriftField;
pub use kernel::{
    simulate_coupled, simulate_frozen, simulate_sequence_driven, CoupledEndpoint, Trajectory,
};
pub use mc::{
    mc_absorption_counts, mc_fast_marginal_coupled, mc_fast_marginal_frozen, mc_observable_mean,
    run_replicas, run_replicas_sequential, McStats,
};
pub use model::SlowFastModel;
pub use rng::ReplicaRng;
