//! Numerical tolerances and resource limits, fixed in one place.

/// Construction tolerance: rows of a stochastic matrix must sum to 1 within this.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Probability vectors produced by linear solves must sum to 1 within this.
pub const MASS_TOL: f64 = 1e-10;

/// Stationarity residual `||mu^T P - mu^T||_1` allowed for a solved class law.
pub const STATIONARY_RESIDUAL_TOL: f64 = 1e-10;

/// Default target for the certified absorption bound `z0`.
pub const DEFAULT_Z0_TARGET: f64 = 0.5;

/// Default Poisson tail mass at which poissonization truncates.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Simulations refuse to start when `rate * t_end` exceeds this many expected jumps.
pub const MAX_EXPECTED_JUMPS: f64 = 1e9;

/// Default integrator resolution: the RK4 step is `t_end / DEFAULT_RK4_STEPS`.
pub const DEFAULT_RK4_STEPS: u32 = 10_000;
