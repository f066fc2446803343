//! Sequence-gap experiment: how far the sequence-driven law drifts from the
//! frozen law as the sequence moves distance `delta` away, plus the proof's
//! working-timescale diagnostic at `t0 = 1 / sqrt(lambda)`.

use crate::consts::DEFAULT_TAIL_TOL;
use crate::error::Result;
use crate::export::{fmt_f64, Csv, Summary};
use crate::law::{frozen_vs_sequence_gap, suggested_k_max, tv_distance, JumpSequence};
use crate::markov::{analyze_at, AssumptionCertificate};
use crate::sim::{mc_fast_marginal_coupled, SlowFastModel};
use crate::stats::{ols, LineFit};

#[derive(Debug, Clone)]
pub struct SeqGapPoint {
    pub delta: f64,
    pub gap: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct T0Point {
    pub lambda: f64,
    pub t0: f64,
    pub tv_to_limit: f64,
}

#[derive(Debug, Clone)]
pub struct SequenceGapReport {
    pub model_name: String,
    pub model_hash: String,
    pub ball_radius: f64,
    pub points: Vec<SeqGapPoint>,
    pub fit: LineFit,
    pub t0_points: Vec<T0Point>,
}

impl SequenceGapReport {
    pub fn ratio_spread(&self) -> f64 {
        let ratios: Vec<f64> = self.points.iter().map(|p| p.ratio).collect();
        let lo = ratios.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let hi = ratios.iter().fold(0.0f64, |a, &b| a.max(b));
        if hi == 0.0 {
            // gap identically zero (decoupled family): nothing varies
            0.0
        } else if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo - 1.0
        }
    }

    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&["delta", "gap", "ratio"]);
        for p in &self.points {
            csv.row(&[fmt_f64(p.delta), fmt_f64(p.gap), fmt_f64(p.ratio)]);
        }
        csv.render()
    }

    pub fn to_summary(&self) -> String {
        let mut s = Summary::new();
        s.section("sequence_gap")
            .kv("model", &self.model_name)
            .kv("model_hash", &self.model_hash)
            .kv_f64("ball_radius", self.ball_radius)
            .kv_f64("fit_slope", self.fit.slope)
            .kv_f64("fit_r2", self.fit.r2)
            .kv_f64("ratio_spread", self.ratio_spread());
        if !self.t0_points.is_empty() {
            s.section("coupled_marginal_at_t0");
            for p in &self.t0_points {
                s.kv(
                    &format!("tv_lambda_{}", fmt_f64(p.lambda)),
                    fmt_f64(p.tv_to_limit),
                );
            }
        }
        s.render()
    }
}

/// Gap table over `delta_grid`: for each `delta`, the sequence sits constantly
/// at `x0 + delta * direction` (1-norm-normalized direction).
#[allow(clippy::too_many_arguments)]
pub fn sequence_gap_experiment(
    model: &SlowFastModel,
    certificate: &AssumptionCertificate,
    x0: &[f64],
    v0_label: &str,
    delta_grid: &[f64],
    direction: &[f64],
    t: f64,
    lambda: f64,
) -> Result<SequenceGapReport> {
    let v0 = model
        .state_space
        .index_of(v0_label)
        .ok_or_else(|| crate::error::Error::InvalidInput(format!("unknown state {v0_label:?}")))?;
    let rate = model.clock_multiplicity * lambda;
    let norm: f64 = direction.iter().map(|d| d.abs()).sum();
    let dir: Vec<f64> = direction.iter().map(|d| d / norm).collect();

    let seq_len = suggested_k_max(rate * t) + 1;
    let mut points = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        let shifted: Vec<f64> = x0.iter().zip(&dir).map(|(x, d)| x + delta * d).collect();
        let seq = JumpSequence::constant(shifted, x0.to_vec(), seq_len)?;
        let gap = frozen_vs_sequence_gap(
            &model.family,
            certificate,
            x0,
            v0,
            &seq,
            rate,
            t,
            DEFAULT_TAIL_TOL,
        )?;
        points.push(SeqGapPoint {
            delta,
            gap: gap.gap,
            ratio: if delta > 0.0 { gap.gap / delta } else { 0.0 },
        });
    }

    let xs: Vec<f64> = points.iter().map(|p| p.delta).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.gap).collect();
    let fit = if points.len() >= 2 {
        ols(&xs, &ys)
    } else {
        LineFit {
            slope: 0.0,
            intercept: 0.0,
            r2: 1.0,
        }
    };

    Ok(SequenceGapReport {
        model_name: model.name.clone(),
        model_hash: model.provenance_hash(),
        ball_radius: certificate.stability_ball_radius(model.family.lipschitz_bound()),
        points,
        fit,
        t0_points: Vec::new(),
    })
}

/// Distance of the empirical coupled fast marginal at `t0 = 1 / sqrt(lambda)`
/// from the frozen limit law, mirroring the proof's working timescale.
pub fn coupled_marginal_distance_at_t0(
    builder: &dyn Fn(f64) -> Result<SlowFastModel>,
    x0: &[f64],
    v0_label: &str,
    lambdas: &[f64],
    h: f64,
    m: usize,
    seed: u64,
) -> Result<Vec<T0Point>> {
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let model = builder(lambda)?;
        let v0 = model.state_space.index_of(v0_label).ok_or_else(|| {
            crate::error::Error::InvalidInput(format!("unknown state {v0_label:?}"))
        })?;
        let analysis = analyze_at(&model.family, x0)?;
        let limit = analysis.limit_law_from(v0)?;
        let t0 = 1.0 / lambda.sqrt();
        let counts = mc_fast_marginal_coupled(&model, x0, v0, t0, h, m, seed)?;
        let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
        out.push(T0Point {
            lambda,
            t0,
            tv_to_limit: tv_distance(&empirical, &limit.measure)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::certify_assumptions;
    use crate::models::{build_coupled_navigation, build_toy};

    #[test]
    fn constant_family_gap_is_zero() {
        let m = build_toy(2, 1.0).unwrap();
        let x0 = vec![0.2, 0.1];
        let cert = certify_assumptions(&m.family, std::slice::from_ref(&x0), 32).unwrap();
        let rep = sequence_gap_experiment(
            &m,
            &cert,
            &x0,
            "+-",
            &[1e-3, 1e-2, 1e-1],
            &[1.0, 0.0],
            1.0,
            3.0,
        )
        .unwrap();
        for p in rep.points {
            assert_eq!(p.gap, 0.0);
        }
    }

    #[test]
    fn navigation_gap_scales_linearly() {
        let m = build_coupled_navigation(2, 1.0, 1.5).unwrap();
        let x0 = vec![0.2, 0.1];
        let grid = vec![x0.clone(), vec![0.3, 0.0], vec![0.1, 0.2]];
        let cert = certify_assumptions(&m.family, &grid, 32).unwrap();
        let zero = sequence_gap_experiment(
            &m,
            &cert,
            &x0,
            "+-",
            &[0.0],
            &[1.0, 0.0],
            1.0,
            3.0,
        )
        .unwrap();
        assert_eq!(zero.points[0].gap, 0.0);
        let rep = sequence_gap_experiment(
            &m,
            &cert,
            &x0,
            "+-",
            &[1e-3, 1e-2, 1e-1],
            &[1.0, 0.0],
            1.0,
            3.0,
        )
        .unwrap();
        assert!(rep.points.iter().all(|p| p.gap > 0.0));
        assert!(
            rep.ratio_spread() < 0.5,
            "ratio spread {} too large: {:?}",
            rep.ratio_spread(),
            rep.points
        );
        // gap(0) = 0 is implied by the linear fit passing near the origin
        assert!(rep.fit.intercept.abs() < 1e-3);
    }
}
