//! Run configuration: one structured TOML file, with flags overriding only
//! the seed and output directory. Parsing is total: every malformed input is
//! reported as a diagnostic with the parser's line/column information.

use serde::{Deserialize, Serialize};
use slowfast::models::ModelSpec;
use slowfast::Observable;

fn default_max_steps() -> usize {
    64
}
fn default_z0_target() -> f64 {
    slowfast::consts::DEFAULT_Z0_TARGET
}
fn default_m_sim() -> usize {
    1
}
fn default_seed() -> u64 {
    20260810
}
fn default_rk4_steps() -> u32 {
    slowfast::consts::DEFAULT_RK4_STEPS
}
fn default_report_points() -> u32 {
    100
}
fn default_measure_mode() -> String {
    "state_dependent".into()
}
fn default_observable() -> String {
    "tanh_coordinate".into()
}
fn default_observable_index() -> usize {
    1
}
fn default_bump_width() -> f64 {
    1.0
}
fn default_experiment_m() -> usize {
    100_000
}
fn default_lambda_grid() -> Vec<f64> {
    vec![10.0, 100.0, 1000.0, 10000.0]
}
fn default_t() -> f64 {
    1.0
}
fn default_delta_grid() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1]
}
fn default_gap_lambda() -> f64 {
    3.0
}
fn default_decay_lambda() -> f64 {
    1.0
}
fn default_decay_t_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64).collect()
}
fn default_out_dir() -> String {
    "out".into()
}
fn default_formats() -> Vec<String> {
    vec!["csv".into(), "summary".into()]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: String,
    pub n: usize,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip_acceptance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub companion_drift: Option<f64>,
}

impl ModelSection {
    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            name: self.name.clone(),
            n: self.n,
            lambda: self.lambda,
            beta: self.beta,
            mixing: self.mixing,
            flip_acceptance: self.flip_acceptance,
            companion_drift: self.companion_drift,
        }
    }

    pub fn spec_at_lambda(&self, lambda: f64) -> ModelSpec {
        let mut s = self.spec();
        s.lambda = lambda;
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Slow states at which the family is certified.
    pub grid: Vec<Vec<f64>>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_z0_target")]
    pub z0_target: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            grid: vec![],
            max_steps: default_max_steps(),
            z0_target: default_z0_target(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub x0: Vec<f64>,
    pub v0: String,
    pub t_end: f64,
    #[serde(default = "default_m_sim")]
    pub m: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_rk4_steps")]
    pub rk4_steps: u32,
    #[serde(default = "default_report_points")]
    pub report_points: u32,
    #[serde(default = "default_measure_mode")]
    pub frozen_measure_mode: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub lambda_grid: Vec<f64>,
    pub m: usize,
    pub t: f64,
    pub observable: String,
    pub observable_index: usize,
    pub bump_width: f64,
    pub delta_grid: Vec<f64>,
    pub gap_lambda: f64,
    pub gap_direction: Vec<f64>,
    pub decay_lambda: f64,
    pub decay_t_grid: Vec<f64>,
    pub t0_lambdas: Vec<f64>,
    pub t0_m: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            lambda_grid: default_lambda_grid(),
            m: default_experiment_m(),
            t: default_t(),
            observable: default_observable(),
            observable_index: default_observable_index(),
            bump_width: default_bump_width(),
            delta_grid: default_delta_grid(),
            gap_lambda: default_gap_lambda(),
            gap_direction: vec![],
            decay_lambda: default_decay_lambda(),
            decay_t_grid: default_decay_t_grid(),
            t0_lambdas: vec![],
            t0_m: 20_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    pub simulation: SimulationSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| format!("config error: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        let n = self.model.n;
        if self.model.name.is_empty() {
            return Err("model.name: must not be empty".into());
        }
        if n == 0 {
            return Err("model.n: must be at least 1".into());
        }
        if !(self.model.lambda > 0.0) {
            return Err(format!("model.lambda: {} must be positive", self.model.lambda));
        }
        if self.simulation.x0.len() != n {
            return Err(format!(
                "simulation.x0: has {} coordinates but model.n = {n}",
                self.simulation.x0.len()
            ));
        }
        if !(self.simulation.t_end > 0.0) {
            return Err("simulation.t_end: must be positive".into());
        }
        if self.simulation.m == 0 {
            return Err("simulation.m: must be at least 1".into());
        }
        if self.simulation.rk4_steps == 0 || self.simulation.report_points == 0 {
            return Err("simulation.rk4_steps and simulation.report_points: must be positive".into());
        }
        if !self.simulation.rk4_steps.is_multiple_of(self.simulation.report_points) {
            return Err(format!(
                "simulation.rk4_steps ({}) must be a multiple of simulation.report_points ({}) so the integrator step divides the reporting grid",
                self.simulation.rk4_steps, self.simulation.report_points
            ));
        }
        match self.simulation.frozen_measure_mode.as_str() {
            "state_dependent" | "anchored_at_x0" => {}
            other => {
                return Err(format!(
                    "simulation.frozen_measure_mode: unknown mode {other:?} (expected state_dependent or anchored_at_x0)"
                ))
            }
        }
        for p in &self.analysis.grid {
            if p.len() != n {
                return Err(format!(
                    "analysis.grid: point {p:?} has {} coordinates but model.n = {n}",
                    p.len()
                ));
            }
        }
        if !(self.analysis.z0_target > 0.0 && self.analysis.z0_target < 1.0) {
            return Err(format!(
                "analysis.z0_target: {} outside (0, 1)",
                self.analysis.z0_target
            ));
        }
        if self.experiment.observable_index == 0 || self.experiment.observable_index > n {
            return Err(format!(
                "experiment.observable_index: {} outside 1..={n}",
                self.experiment.observable_index
            ));
        }
        match self.experiment.observable.as_str() {
            "coordinate" | "tanh_coordinate" | "smooth_bump" => {}
            other => {
                return Err(format!(
                    "experiment.observable: unknown observable {other:?} (catalog: coordinate, tanh_coordinate, smooth_bump)"
                ))
            }
        }
        if !self.experiment.gap_direction.is_empty() && self.experiment.gap_direction.len() != n {
            return Err(format!(
                "experiment.gap_direction: has {} coordinates but model.n = {n}",
                self.experiment.gap_direction.len()
            ));
        }
        for f in &self.output.formats {
            if f != "csv" && f != "summary" {
                return Err(format!("output.formats: unknown format {f:?}"));
            }
        }
        Ok(())
    }

    /// Analysis anchor: the simulation start point.
    pub fn anchor(&self) -> Vec<f64> {
        self.simulation.x0.clone()
    }

    /// Certification grid: configured points, or a default 5-point cross
    /// around the anchor.
    pub fn certification_grid(&self) -> Vec<Vec<f64>> {
        if !self.analysis.grid.is_empty() {
            return self.analysis.grid.clone();
        }
        let x0 = self.anchor();
        let mut grid = vec![x0.clone()];
        for delta in [0.1, -0.1] {
            for dim in 0..x0.len().min(2) {
                let mut p = x0.clone();
                p[dim] += delta;
                grid.push(p);
            }
        }
        grid
    }

    pub fn observable(&self) -> Observable {
        let idx = self.experiment.observable_index - 1;
        match self.experiment.observable.as_str() {
            "coordinate" => Observable::Coordinate(idx),
            "smooth_bump" => Observable::SmoothBump {
                center: self.simulation.x0.clone(),
                width: self.experiment.bump_width,
            },
            _ => Observable::TanhCoordinate(idx),
        }
    }

    pub fn measure_mode(&self) -> slowfast::MeasureMode {
        match self.simulation.frozen_measure_mode.as_str() {
            "anchored_at_x0" => slowfast::MeasureMode::AnchoredAtX0,
            _ => slowfast::MeasureMode::StateDependent,
        }
    }

    pub fn gap_direction(&self) -> Vec<f64> {
        if self.experiment.gap_direction.is_empty() {
            let mut d = vec![0.0; self.model.n];
            d[0] = 1.0;
            d
        } else {
            self.experiment.gap_direction.clone()
        }
    }

    /// Resolved config as TOML, echoed into every summary for provenance.
    pub fn echo(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| format!("# config echo failed: {e}"))
    }
}
