//! Weak-error experiment: `|E f(X_t^lambda) - E f(X_bar_t)|` over a grid of
//! clock rates, with Monte Carlo confidence intervals and a log-log slope fit.

use crate::error::{Error, Result};
use crate::export::{fmt_f64, Csv, Summary};
use crate::markov::analyze_at;
use crate::observable::Observable;
use crate::sim::{
    averaged_branch_path, mc_observable_mean, run_replicas, MeasureMode, ReplicaRng, SlowFastModel,
};
use crate::stats::{mean_var, ols};

/// How the averaged-side expectation is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AveragedSide {
    /// `E f(X_bar_t) = sum_i q^(i)(x0, v0) f(y^i(t))`: exact branch
    /// enumeration, zero sampling error on the averaged side.
    ExactEnumeration,
    /// Draw `zeta` per replica and average `f(y^zeta(t))`.
    Sampled,
}

#[derive(Debug, Clone)]
pub struct WeakErrorPoint {
    pub lambda: f64,
    pub error: f64,
    pub ci_half: f64,
    pub mc_mean: f64,
    pub averaged: f64,
    /// CI half-width exceeds half the measured error: the point is excluded
    /// from the slope fit.
    pub dominated: bool,
}

#[derive(Debug, Clone)]
pub struct WeakErrorReport {
    pub model_name: String,
    pub model_hash: String,
    pub observable_name: String,
    pub x0: Vec<f64>,
    pub v0_label: String,
    pub t: f64,
    pub m: usize,
    pub seed: u64,
    pub measure_mode: MeasureMode,
    pub averaged_side: AveragedSide,
    pub points: Vec<WeakErrorPoint>,
    /// OLS slope of `ln error` on `ln lambda` over non-dominated points.
    pub fitted_slope: Option<f64>,
    pub fit_r2: Option<f64>,
    pub warning: Option<String>,
}

impl WeakErrorReport {
    /// Errors strictly decrease along the grid wherever the confidence
    /// intervals of the two error estimates do not overlap.
    pub fn decreasing_up_to_ci_overlap(&self) -> bool {
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                let a = &self.points[i];
                let b = &self.points[j];
                let disjoint = (a.error - a.ci_half) > (b.error + b.ci_half)
                    || (b.error - b.ci_half) > (a.error + a.ci_half);
                if disjoint && a.error <= b.error {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&[
            "lambda",
            "error",
            "ci_half",
            "mc_mean",
            "averaged",
            "dominated",
        ]);
        for p in &self.points {
            csv.row(&[
                fmt_f64(p.lambda),
                fmt_f64(p.error),
                fmt_f64(p.ci_half),
                fmt_f64(p.mc_mean),
                fmt_f64(p.averaged),
                (p.dominated as u8).to_string(),
            ]);
        }
        csv.render()
    }

    pub fn to_summary(&self) -> String {
        let mut s = Summary::new();
        s.section("weak_error")
            .kv("model", &self.model_name)
            .kv("model_hash", &self.model_hash)
            .kv("observable", &self.observable_name)
            .kv(
                "x0",
                self.x0.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" "),
            )
            .kv("v0", &self.v0_label)
            .kv_f64("t", self.t)
            .kv("m", self.m)
            .kv("seed", self.seed)
            .kv("measure_mode", self.measure_mode.as_str())
            .kv(
                "averaged_side",
                match self.averaged_side {
                    AveragedSide::ExactEnumeration => "exact_enumeration",
                    AveragedSide::Sampled => "sampled",
                },
            );
        match self.fitted_slope {
            Some(sl) => s.kv_f64("fitted_slope", sl),
            None => s.kv("fitted_slope", "none"),
        };
        match self.fit_r2 {
            Some(r2) => s.kv_f64("fit_r2", r2),
            None => s.kv("fit_r2", "none"),
        };
        if let Some(w) = &self.warning {
            s.kv("warning", w);
        }
        s.render()
    }
}

/// Run the weak-error experiment over `lambda_grid`. `builder` constructs the
/// model at a given per-clock rate; `M` coupled replicas per grid point.
#[allow(clippy::too_many_arguments)]
pub fn weak_error_experiment(
    builder: &dyn Fn(f64) -> Result<SlowFastModel>,
    x0: &[f64],
    v0_label: &str,
    t: f64,
    h: f64,
    observable: &Observable,
    lambda_grid: &[f64],
    m: usize,
    seed: u64,
    measure_mode: MeasureMode,
) -> Result<WeakErrorReport> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidInput("lambda grid must be nonempty".into()));
    }
    if m < 1000 {
        return Err(Error::InvalidInput(format!(
            "need at least 1000 replicas per grid point, got {m}"
        )));
    }

    let mut points = Vec::with_capacity(lambda_grid.len());
    let mut model_name = String::new();
    let mut model_hash = String::new();
    let mut averaged_side = AveragedSide::ExactEnumeration;

    for (gi, &lambda) in lambda_grid.iter().enumerate() {
        let model = builder(lambda)?;
        model.validate()?;
        if observable.max_index() >= model.dim {
            return Err(Error::DimensionMismatch(format!(
                "observable reads coordinate {} of a {}-dimensional model",
                observable.max_index() + 1,
                model.dim
            )));
        }
        let v0 = model
            .state_space
            .index_of(v0_label)
            .ok_or_else(|| Error::InvalidInput(format!("unknown state label {v0_label:?}")))?;
        if gi == 0 {
            model_name = model.name.clone();
            model_hash = model.provenance_hash();
        }

        let base = analyze_at(&model.family, x0)?;
        let l = base.decomposition.class_count();
        // exact enumeration is available when the branch ODEs are well defined
        // from x0 alone: few classes, measures constant along the path
        let exact_ok = l <= 8
            && (model.family.constant_in_x()
                || base.decomposition.classes().iter().all(|c| c.len() == 1));
        averaged_side = if exact_ok {
            AveragedSide::ExactEnumeration
        } else {
            AveragedSide::Sampled
        };

        let branch_values: Vec<f64> = (0..l)
            .map(|i| {
                averaged_branch_path(&model, &base, i, x0, t, h, measure_mode)
                    .map(|y| observable.eval(&y))
            })
            .collect::<Result<Vec<_>>>()?;

        let averaged = match averaged_side {
            AveragedSide::ExactEnumeration => base
                .profile
                .row(v0)
                .iter()
                .zip(&branch_values)
                .map(|(q, f)| q * f)
                .sum(),
            AveragedSide::Sampled => {
                let qrow = base.profile.row(v0).to_vec();
                let vals = run_replicas(m, seed ^ 0x5eed_a5ed, |_i, mut rng: ReplicaRng| {
                    branch_values[rng.categorical(&qrow)]
                });
                mean_var(&vals).mean
            }
        };

        let mc = mc_observable_mean(&model, x0, v0, t, h, observable, m, seed)?;
        let error = (mc.mean - averaged).abs();
        let ci_half = 1.96 * mc.se;
        points.push(WeakErrorPoint {
            lambda,
            error,
            ci_half,
            mc_mean: mc.mean,
            averaged,
            dominated: ci_half > 0.5 * error,
        });
    }

    let usable: Vec<&WeakErrorPoint> = points
        .iter()
        .filter(|p| !p.dominated && p.error > 0.0)
        .collect();
    let mut warning = None;
    if points.iter().any(|p| p.dominated) {
        warning = Some(format!(
            "MCErrorDominates: CI half-width exceeds 50% of the error at {} of {} grid points",
            points.iter().filter(|p| p.dominated).count(),
            points.len()
        ));
    }
    let (fitted_slope, fit_r2) = if usable.len() >= 2 {
        let xs: Vec<f64> = usable.iter().map(|p| p.lambda.ln()).collect();
        let ys: Vec<f64> = usable.iter().map(|p| p.error.ln()).collect();
        let fit = ols(&xs, &ys);
        (Some(fit.slope), Some(fit.r2))
    } else {
        (None, None)
    };

    Ok(WeakErrorReport {
        model_name,
        model_hash,
        observable_name: observable.name(),
        x0: x0.to_vec(),
        v0_label: v0_label.to_string(),
        t,
        m,
        seed,
        measure_mode,
        averaged_side,
        points,
        fitted_slope,
        fit_r2,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_toy;
    use crate::sim::DriftField;

    #[test]
    fn drift_blind_to_fast_state_gives_zero_error() {
        // a(x, v) independent of v: the coupled path is deterministic and
        // equals every averaged branch, so the error vanishes at all lambda
        let builder = |lambda: f64| {
            let mut m = build_toy(2, lambda)?;
            m.drift = DriftField::from_state_table(vec![vec![0.3, -0.1]; 4], 0.4);
            Ok(m)
        };
        let report = weak_error_experiment(
            &builder,
            &[0.0, 0.0],
            "+-",
            1.0,
            1e-4,
            &Observable::TanhCoordinate(0),
            &[10.0, 100.0],
            2000,
            7,
            MeasureMode::StateDependent,
        )
        .unwrap();
        for p in &report.points {
            assert!(p.error < 1e-12, "error {p:?}");
        }
    }

    #[test]
    fn rejects_tiny_sample() {
        let builder = |lambda: f64| build_toy(2, lambda);
        let err = weak_error_experiment(
            &builder,
            &[0.0, 0.0],
            "+-",
            1.0,
            1e-4,
            &Observable::TanhCoordinate(0),
            &[10.0],
            10,
            7,
            MeasureMode::StateDependent,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }
}
