//! Event-driven simulation of the coupled, frozen and sequence-driven
//! processes.
//!
//! The Poisson clock is exact: inter-jump gaps are exponential draws, never a
//! discretised approximation. Between jumps the slow ODE is integrated with
//! fixed-step classical RK4, with a final partial step landing exactly on the
//! jump time; when the drift does not depend on `x` the segment solution is
//! linear and is advanced in closed form instead.
//!
//! Draw discipline, shared by every kernel: per jump, first the exponential
//! gap, then the uniform used for the transition row. Replaying a recorded
//! slow path as a jump sequence under the same `(seed, stream)` therefore
//! reproduces the coupled run's fast path exactly.

use super::drift::DriftField;
use super::model::SlowFastModel;
use super::rng::ReplicaRng;
use crate::consts::MAX_EXPECTED_JUMPS;
use crate::error::{Error, Result};
use crate::law::JumpSequence;
use crate::markov::StochasticMatrix;

/// Sampled path of a run. The fast path is cadlag: the value stored at a jump
/// time is the post-jump state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Slow states per sample time; empty for fast-only runs.
    pub slow: Vec<Vec<f64>>,
    /// Fast state index per sample time.
    pub fast: Vec<usize>,
    /// Whether the sample sits at a Poisson event.
    pub jumped: Vec<bool>,
    /// All Poisson event times in `[0, t_end]`.
    pub jump_times: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn endpoint_slow(&self) -> Option<&[f64]> {
        self.slow.last().map(Vec::as_slice)
    }

    pub fn endpoint_fast(&self) -> usize {
        *self.fast.last().expect("empty trajectory")
    }
}

/// Endpoint of a coupled run, for Monte Carlo use.
#[derive(Debug, Clone)]
pub struct CoupledEndpoint {
    pub x: Vec<f64>,
    pub v: usize,
    pub jumps: u64,
}

pub(crate) fn check_jump_budget(rate: f64, t_end: f64) -> Result<()> {
    let expected = rate * t_end;
    if expected > MAX_EXPECTED_JUMPS {
        return Err(Error::ResourceLimit(format!(
            "rate * t_end = {expected:.3e} expected jumps exceeds {MAX_EXPECTED_JUMPS:.0e}"
        )));
    }
    Ok(())
}

fn check_inputs(model: &SlowFastModel, v0: usize, t_end: f64, h: f64) -> Result<()> {
    model.validate()?;
    if v0 >= model.state_space.size() {
        return Err(Error::InvalidInput(format!("start state {v0} out of range")));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidInput("t_end must be positive".into()));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidInput("integrator step h must be positive".into()));
    }
    check_jump_budget(model.rate, t_end)
}

/// One classical RK4 step of the autonomous slow ODE at frozen fast state `v`.
fn rk4_step(drift: &DriftField, v: usize, x: &mut [f64], dt: f64, scratch: &mut RkScratch) {
    let n = x.len();
    let RkScratch { k1, k2, k3, k4, xtmp } = scratch;
    drift.eval(x, v, k1);
    for i in 0..n {
        xtmp[i] = x[i] + 0.5 * dt * k1[i];
    }
    drift.eval(xtmp, v, k2);
    for i in 0..n {
        xtmp[i] = x[i] + 0.5 * dt * k2[i];
    }
    drift.eval(xtmp, v, k3);
    for i in 0..n {
        xtmp[i] = x[i] + dt * k3[i];
    }
    drift.eval(xtmp, v, k4);
    for i in 0..n {
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

pub(crate) struct RkScratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    xtmp: Vec<f64>,
}

impl RkScratch {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            xtmp: vec![0.0; dim],
        }
    }
}

/// Advance the slow state over `[t_from, t_to]` at frozen fast state `v`.
pub(crate) fn advance_slow(
    drift: &DriftField,
    v: usize,
    x: &mut [f64],
    span: f64,
    h: f64,
    scratch: &mut RkScratch,
) {
    if span <= 0.0 {
        return;
    }
    if let Some(table) = drift.state_table() {
        for (xi, vi) in x.iter_mut().zip(&table[v]) {
            *xi += span * vi;
        }
        return;
    }
    let full = (span / h).floor() as u64;
    for _ in 0..full {
        rk4_step(drift, v, x, h, scratch);
    }
    let rest = span - full as f64 * h;
    if rest > span * 1e-14 {
        rk4_step(drift, v, x, rest, scratch);
    }
}

/// Fully coupled run with full path recording: samples at `t = 0`, at every
/// multiple of `report_dt`, at every jump time, and at `t_end`.
pub fn simulate_coupled(
    model: &SlowFastModel,
    x0: &[f64],
    v0: usize,
    t_end: f64,
    h: f64,
    report_dt: f64,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    check_inputs(model, v0, t_end, h)?;
    if x0.len() != model.dim {
        return Err(Error::DimensionMismatch(format!(
            "x0 has {} coordinates, model dimension is {}",
            x0.len(),
            model.dim
        )));
    }
    if !(report_dt > 0.0) {
        return Err(Error::InvalidInput("report_dt must be positive".into()));
    }
    // fixed-step integration must tile the reporting grid
    let steps = report_dt / h;
    if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "integrator step h = {h} does not divide report_dt = {report_dt}"
        )));
    }

    let mut rng = ReplicaRng::new(seed, stream);
    let mut scratch = RkScratch::new(model.dim);
    let mut row = vec![0.0; model.state_space.size()];
    let mut x = x0.to_vec();
    let mut v = v0;
    let mut t = 0.0f64;

    let mut traj = Trajectory {
        times: vec![0.0],
        slow: vec![x.clone()],
        fast: vec![v],
        jumped: vec![false],
        jump_times: Vec::new(),
    };
    let mut report_idx: u64 = 1;

    let record = |traj: &mut Trajectory, time: f64, x: &[f64], v: usize, jumped: bool| {
        if let Some(&last) = traj.times.last() {
            if time - last < 1e-12 * t_end.max(1.0) && !traj.times.is_empty() {
                // collapse coincident samples, keeping the latest fast state
                if jumped {
                    *traj.fast.last_mut().unwrap() = v;
                    *traj.jumped.last_mut().unwrap() = true;
                    traj.slow.last_mut().unwrap().copy_from_slice(x);
                }
                return;
            }
        }
        traj.times.push(time);
        traj.slow.push(x.to_vec());
        traj.fast.push(v);
        traj.jumped.push(jumped);
    };

    loop {
        let gap = rng.exp(model.rate);
        let t_jump = t + gap;
        let seg_end = t_jump.min(t_end);

        // reporting samples strictly inside the segment
        while (report_idx as f64) * report_dt < seg_end - 1e-12 * t_end {
            let tr = report_idx as f64 * report_dt;
            advance_slow(&model.drift, v, &mut x, tr - t, h, &mut scratch);
            t = tr;
            record(&mut traj, t, &x, v, false);
            report_idx += 1;
        }
        advance_slow(&model.drift, v, &mut x, seg_end - t, h, &mut scratch);
        t = seg_end;

        if t_jump >= t_end {
            record(&mut traj, t_end, &x, v, false);
            break;
        }
        model.family.row_into(&x, v, &mut row);
        v = rng.categorical(&row);
        traj.jump_times.push(t);
        record(&mut traj, t, &x, v, true);
        while (report_idx as f64) * report_dt <= t + 1e-12 * t_end {
            report_idx += 1;
        }
    }
    Ok(traj)
}

/// Coupled run keeping only the endpoint. Once the fast state enters a
/// declared invariant state the clock is switched off: remaining jumps cannot
/// change either component, so the endpoint law is unchanged.
#[allow(clippy::too_many_arguments)]
pub(crate) fn coupled_endpoint(
    model: &SlowFastModel,
    x0: &[f64],
    v0: usize,
    t_end: f64,
    h: f64,
    rng: &mut ReplicaRng,
    scratch: &mut RkScratch,
    row: &mut [f64],
) -> CoupledEndpoint {
    let mut x = x0.to_vec();
    let mut v = v0;
    let mut t = 0.0f64;
    let mut jumps = 0u64;

    // decoupled families keep one matrix for the whole run
    let const_matrix = model
        .family
        .constant_in_x()
        .then(|| model.family.evaluate(x0));

    while !model.invariant_states[v] {
        let gap = rng.exp(model.rate);
        if t + gap >= t_end {
            advance_slow(&model.drift, v, &mut x, t_end - t, h, scratch);
            return CoupledEndpoint { x, v, jumps };
        }
        advance_slow(&model.drift, v, &mut x, gap, h, scratch);
        t += gap;
        let row_slice: &[f64] = match &const_matrix {
            Some(m) => m.row(v),
            None => {
                model.family.row_into(&x, v, row);
                row
            }
        };
        v = rng.categorical(row_slice);
        jumps += 1;
    }
    advance_slow(&model.drift, v, &mut x, t_end - t, h, scratch);
    CoupledEndpoint { x, v, jumps }
}

/// Frozen fast process: the matrix is `P_x_frozen` at every jump. Fast path
/// only.
pub fn simulate_frozen(
    model: &SlowFastModel,
    x_frozen: &[f64],
    v0: usize,
    t_end: f64,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    check_inputs(model, v0, t_end, 1.0)?;
    let matrix = model.family.evaluate(x_frozen);
    let mut rng = ReplicaRng::new(seed, stream);
    Ok(frozen_fast_path(&matrix, model.rate, v0, t_end, &mut rng))
}

pub(crate) fn frozen_fast_path(
    matrix: &StochasticMatrix,
    rate: f64,
    v0: usize,
    t_end: f64,
    rng: &mut ReplicaRng,
) -> Trajectory {
    let mut traj = Trajectory {
        times: vec![0.0],
        slow: Vec::new(),
        fast: vec![v0],
        jumped: vec![false],
        jump_times: Vec::new(),
    };
    let mut t = 0.0;
    let mut v = v0;
    loop {
        let gap = rng.exp(rate);
        if t + gap >= t_end {
            traj.times.push(t_end);
            traj.fast.push(v);
            traj.jumped.push(false);
            return traj;
        }
        t += gap;
        v = rng.categorical(matrix.row(v));
        traj.times.push(t);
        traj.fast.push(v);
        traj.jumped.push(true);
        traj.jump_times.push(t);
    }
}

/// Endpoint-only frozen run; stops drawing once an absorbing row is reached.
pub(crate) fn frozen_endpoint(
    matrix: &StochasticMatrix,
    rate: f64,
    v0: usize,
    t_end: f64,
    rng: &mut ReplicaRng,
) -> usize {
    let mut t = 0.0;
    let mut v = v0;
    while matrix.entry(v, v) < 1.0 {
        let gap = rng.exp(rate);
        if t + gap >= t_end {
            return v;
        }
        t += gap;
        v = rng.categorical(matrix.row(v));
    }
    v
}

/// Fast process driven by a prescribed sequence of slow states: the `k`-th
/// jump (1-indexed) uses `P_{x^(k)}`. Fast path only.
pub fn simulate_sequence_driven(
    model: &SlowFastModel,
    v0: usize,
    sequence: &JumpSequence,
    t_end: f64,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    check_inputs(model, v0, t_end, 1.0)?;
    let mut rng = ReplicaRng::new(seed, stream);
    let mut row = vec![0.0; model.state_space.size()];

    let mut traj = Trajectory {
        times: vec![0.0],
        slow: Vec::new(),
        fast: vec![v0],
        jumped: vec![false],
        jump_times: Vec::new(),
    };
    let mut t = 0.0;
    let mut v = v0;
    let mut k = 0usize;
    loop {
        let gap = rng.exp(model.rate);
        if t + gap >= t_end {
            traj.times.push(t_end);
            traj.fast.push(v);
            traj.jumped.push(false);
            return Ok(traj);
        }
        t += gap;
        if k >= sequence.len() {
            return Err(Error::SequenceTooShort {
                needed: k + 1,
                have: sequence.len(),
            });
        }
        model.family.row_into(sequence.point(k), v, &mut row);
        v = rng.categorical(&row);
        k += 1;
        traj.times.push(t);
        traj.fast.push(v);
        traj.jumped.push(true);
        traj.jump_times.push(t);
    }
}
