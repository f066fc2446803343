//! Exponential decay of the frozen law toward its limit: exact TV values via
//! Poissonization over a `(t, lambda)` grid, with a log-linear fit in the
//! product `t * lambda`.

use crate::consts::DEFAULT_TAIL_TOL;
use crate::error::Result;
use crate::export::{fmt_f64, Csv, Summary};
use crate::law::{discrete_law, poissonize, suggested_k_max, tv_distance, LawDriver};
use crate::markov::analyze_at;
use crate::sim::SlowFastModel;
use crate::stats::ols;

#[derive(Debug, Clone)]
pub struct DecayPoint {
    pub t: f64,
    pub lambda: f64,
    /// Aggregated Poisson mean: `clock_multiplicity * lambda * t`.
    pub poisson_mean: f64,
    pub tv: f64,
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    pub model_name: String,
    pub model_hash: String,
    pub v0_label: String,
    pub points: Vec<DecayPoint>,
    /// Fitted decay rate per unit of `lambda * t` (positive when decaying).
    pub c1_hat: f64,
    /// Fitted prefactor.
    pub k_hat: f64,
    pub r2: f64,
}

impl DecayReport {
    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&["t", "lambda", "poisson_mean", "tv"]);
        for p in &self.points {
            csv.row(&[
                fmt_f64(p.t),
                fmt_f64(p.lambda),
                fmt_f64(p.poisson_mean),
                fmt_f64(p.tv),
            ]);
        }
        csv.render()
    }

    pub fn to_summary(&self) -> String {
        let mut s = Summary::new();
        s.section("fast_decay")
            .kv("model", &self.model_name)
            .kv("model_hash", &self.model_hash)
            .kv("v0", &self.v0_label)
            .kv("points", self.points.len())
            .kv_f64("c1_hat", self.c1_hat)
            .kv_f64("k_hat", self.k_hat)
            .kv_f64("r2", self.r2);
        s.render()
    }
}

/// Exact TV distance between the frozen law at each `(t, lambda)` grid point
/// and the limit law from `v0`, all at the frozen slow state `x_frozen`.
pub fn fast_decay_experiment(
    model: &SlowFastModel,
    x_frozen: &[f64],
    v0_label: &str,
    grid: &[(f64, f64)],
) -> Result<DecayReport> {
    let v0 = model
        .state_space
        .index_of(v0_label)
        .ok_or_else(|| crate::error::Error::InvalidInput(format!("unknown state {v0_label:?}")))?;
    let analysis = analyze_at(&model.family, x_frozen)?;
    let limit = analysis.limit_law_from(v0)?;
    let matrix = &analysis.matrix;

    let max_mean = grid
        .iter()
        .map(|(t, l)| model.clock_multiplicity * l * t)
        .fold(0.0f64, f64::max);
    let traj = discrete_law(&LawDriver::Frozen(matrix), v0, suggested_k_max(max_mean))?;

    let mut points = Vec::with_capacity(grid.len());
    for &(t, lambda) in grid {
        let rate = model.clock_multiplicity * lambda;
        let law = poissonize(&traj, rate, t, DEFAULT_TAIL_TOL)?;
        points.push(DecayPoint {
            t,
            lambda,
            poisson_mean: rate * t,
            tv: tv_distance(&law.law, &limit.measure)?,
        });
    }

    // log-linear fit in lambda * t over points with representable logs
    let fit_pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.tv > 1e-290)
        .map(|p| (p.lambda * p.t, p.tv.ln()))
        .collect();
    let (c1_hat, k_hat, r2) = if fit_pts.len() >= 2 {
        let xs: Vec<f64> = fit_pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = fit_pts.iter().map(|p| p.1).collect();
        let fit = ols(&xs, &ys);
        (-fit.slope, fit.intercept.exp(), fit.r2)
    } else {
        (0.0, 0.0, 1.0)
    };

    Ok(DecayReport {
        model_name: model.name.clone(),
        model_hash: model.provenance_hash(),
        v0_label: v0_label.to_string(),
        points,
        c1_hat,
        k_hat,
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_toy;

    #[test]
    fn absorbing_start_all_zero() {
        let m = build_toy(2, 1.0).unwrap();
        let grid: Vec<(f64, f64)> = (1..=10).map(|k| (k as f64, 1.0)).collect();
        let rep = fast_decay_experiment(&m, &[0.0, 0.0], "++", &grid).unwrap();
        for p in rep.points {
            assert!(p.tv < 1e-12, "tv {p:?}");
        }
    }

    #[test]
    fn toy_decay_is_exactly_log_linear() {
        // TV(t) = 2 exp(-lambda t) for the n=2 toy from a mixed state
        let m = build_toy(2, 1.0).unwrap();
        let grid: Vec<(f64, f64)> = (1..=20).map(|k| (k as f64 / 2.0, 1.0)).collect();
        let rep = fast_decay_experiment(&m, &[0.0, 0.0], "+-", &grid).unwrap();
        assert!(rep.r2 > 0.999999, "r2 = {}", rep.r2);
        assert!((rep.c1_hat - 1.0).abs() < 1e-6, "c1 = {}", rep.c1_hat);
        assert!((rep.k_hat - 2.0).abs() < 1e-6, "k = {}", rep.k_hat);
        for p in &rep.points {
            let expect = 2.0 * (-p.lambda * p.t).exp();
            assert!((p.tv - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn decay_rate_independent_of_start_state() {
        let m = build_toy(3, 1.0).unwrap();
        let grid: Vec<(f64, f64)> = (2..=14).map(|k| (k as f64 / 2.0, 1.0)).collect();
        let a = fast_decay_experiment(&m, &[0.0; 3], "++-", &grid).unwrap();
        let b = fast_decay_experiment(&m, &[0.0; 3], "+--", &grid).unwrap();
        let rel = (a.c1_hat - b.c1_hat).abs() / a.c1_hat;
        assert!(rel < 0.10, "rates {} vs {}", a.c1_hat, b.c1_hat);
    }
}
