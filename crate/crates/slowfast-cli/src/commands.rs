//! The four workflows behind the CLI subcommands.

use std::path::Path;

use slowfast::export::{atomic_write, fmt_f64, Csv, Summary};
use slowfast::harness::acceptance::{run_all, AcceptanceConfig};
use slowfast::harness::{
    coupled_marginal_distance_at_t0, fast_decay_experiment, sequence_gap_experiment,
    weak_error_experiment,
};
use slowfast::models::ModelRegistry;
use slowfast::{
    analyze_at, certify_with_target, mc_observable_mean, simulate_coupled, Error as SfError,
    SlowFastModel, Trajectory,
};

use crate::config::RunConfig;

/// Process exit codes: 0 success, 2 validation, 3 assumption violation,
/// 4 acceptance failure.
#[derive(Debug)]
pub enum CmdError {
    Validation(String),
    Assumption(String),
    AcceptanceFailed,
    Io(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Validation(_) => 2,
            CmdError::Assumption(_) => 3,
            CmdError::AcceptanceFailed => 4,
            CmdError::Io(_) => 1,
        }
    }
}

impl From<SfError> for CmdError {
    fn from(e: SfError) -> Self {
        match e {
            SfError::ClassStructureVaries(_)
            | SfError::NoAbsorptionBound { .. }
            | SfError::BallViolation { .. }
            | SfError::SingularSystem
            | SfError::NotIrreducible(_)
            | SfError::ClassNotClosed(_) => CmdError::Assumption(e.to_string()),
            other => CmdError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e.to_string())
    }
}

pub type CmdResult = Result<(), CmdError>;

fn build_model(cfg: &RunConfig) -> Result<SlowFastModel, CmdError> {
    let registry = ModelRegistry::with_builtins();
    registry.build(&cfg.model.spec()).map_err(CmdError::from)
}

fn write(out_dir: &Path, name: &str, content: &str) -> Result<(), CmdError> {
    atomic_write(&out_dir.join(name), content.as_bytes())?;
    Ok(())
}

fn config_echo_section(s: &mut Summary, cfg: &RunConfig) {
    s.section("config_echo");
    for line in cfg.echo().lines() {
        s.raw(format!("# {line}"));
    }
}

/// `analyze`: decomposition, absorption profile, stationary laws, limit law
/// and the assumption certificate at the configured anchor.
pub fn cmd_analyze(cfg: &RunConfig, out_dir: &Path) -> CmdResult {
    let model = build_model(cfg)?;
    let anchor = cfg.anchor();
    let v0 = model
        .state_space
        .index_of(&cfg.simulation.v0)
        .ok_or_else(|| CmdError::Validation(format!("simulation.v0: unknown state label {:?}", cfg.simulation.v0)))?;

    let certificate = certify_with_target(
        &model.family,
        &cfg.certification_grid(),
        cfg.analysis.max_steps,
        cfg.analysis.z0_target,
    )?;
    let analysis = analyze_at(&model.family, &anchor)?;
    let limit = analysis.limit_law_from(v0)?;

    let mut dec = Csv::new(&["state", "label", "role", "class_index"]);
    for s in 0..model.state_space.size() {
        let (role, class) = match analysis.decomposition.class_of(s) {
            Some(c) => ("class", c.to_string()),
            None => ("transient", String::new()),
        };
        dec.row(&[
            s.to_string(),
            model.state_space.label(s).to_string(),
            role.to_string(),
            class,
        ]);
    }
    write(out_dir, "decomposition.csv", &dec.render())?;

    let l = analysis.decomposition.class_count();
    let header: Vec<String> = (1..=l).map(|i| format!("q_{i}")).collect();
    let mut head: Vec<&str> = vec!["state", "label"];
    head.extend(header.iter().map(String::as_str));
    let mut abs = Csv::new(&head);
    for s in 0..model.state_space.size() {
        let mut row = vec![s.to_string(), model.state_space.label(s).to_string()];
        row.extend(analysis.profile.row(s).iter().map(|q| fmt_f64(*q)));
        abs.row(&row);
    }
    write(out_dir, "absorption.csv", &abs.render())?;

    let mut st = Csv::new(&["class_index", "state", "label", "weight"]);
    for law in &analysis.laws {
        for (&s, &w) in law.states.iter().zip(&law.weights) {
            st.row(&[
                law.class_index.to_string(),
                s.to_string(),
                model.state_space.label(s).to_string(),
                fmt_f64(w),
            ]);
        }
    }
    write(out_dir, "stationary.csv", &st.render())?;

    let mut ll = Csv::new(&["state", "label", "mass"]);
    for (s, &p) in limit.measure.iter().enumerate() {
        ll.row(&[
            s.to_string(),
            model.state_space.label(s).to_string(),
            fmt_f64(p),
        ]);
    }
    write(out_dir, "limit_law.csv", &ll.render())?;

    let mut s = Summary::new();
    s.section("certificate")
        .kv("model", &model.name)
        .kv("model_hash", model.provenance_hash())
        .kv("classes_stable", certificate.classes_stable)
        .kv("n_tilde", certificate.n_tilde)
        .kv_f64("z0", certificate.z0)
        .kv_f64("achieved_bound", certificate.achieved_bound)
        .kv_f64("lipschitz_estimate", certificate.lipschitz_estimate)
        .kv_f64("declared_k0", model.family.lipschitz_bound())
        .kv(
            "stability_ball_radius",
            fmt_f64(certificate.stability_ball_radius(model.family.lipschitz_bound())),
        )
        .kv("grid_points", certificate.sample_grid.len());
    for (i, p) in certificate.sample_grid.iter().enumerate() {
        s.kv(
            &format!("grid_{i}"),
            p.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" "),
        );
    }
    s.section("decomposition")
        .kv("class_count", analysis.decomposition.class_count())
        .kv("transient_states", analysis.decomposition.transient_set().len());
    config_echo_section(&mut s, cfg);
    write(out_dir, "certificate.txt", &s.render())?;
    println!("analyze: wrote decomposition, absorption, stationary, limit law, certificate to {}", out_dir.display());
    Ok(())
}

fn trajectory_csv(model: &SlowFastModel, traj: &Trajectory) -> String {
    let mut head: Vec<String> = vec!["t".into()];
    for i in 1..=model.dim {
        head.push(format!("x_{i}"));
    }
    head.push("v_label".into());
    head.push("jumped".into());
    let head_refs: Vec<&str> = head.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&head_refs);
    for k in 0..traj.len() {
        let mut row = vec![fmt_f64(traj.times[k])];
        row.extend(traj.slow[k].iter().map(|x| fmt_f64(*x)));
        row.push(model.state_space.label(traj.fast[k]).to_string());
        row.push((traj.jumped[k] as u8).to_string());
        csv.row(&row);
    }
    csv.render()
}

/// `simulate`: one fully recorded coupled trajectory, plus a Monte Carlo
/// endpoint summary when more than one replica is requested.
pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path) -> CmdResult {
    let model = build_model(cfg)?;
    let v0 = model
        .state_space
        .index_of(&cfg.simulation.v0)
        .ok_or_else(|| CmdError::Validation(format!("simulation.v0: unknown state label {:?}", cfg.simulation.v0)))?;
    let sim = &cfg.simulation;
    let h = sim.t_end / sim.rk4_steps as f64;
    let report_dt = sim.t_end / sim.report_points as f64;

    let traj = simulate_coupled(&model, &sim.x0, v0, sim.t_end, h, report_dt, sim.seed, 0)?;
    write(out_dir, "trajectory.csv", &trajectory_csv(&model, &traj))?;

    let mut s = Summary::new();
    s.section("simulate")
        .kv("model", &model.name)
        .kv("model_hash", model.provenance_hash())
        .kv("seed", sim.seed)
        .kv_f64("t_end", sim.t_end)
        .kv_f64("h", h)
        .kv_f64("rate", model.rate)
        .kv("jumps", traj.jump_times.len())
        .kv("v_end", model.state_space.label(traj.endpoint_fast()))
        .kv(
            "x_end",
            traj.endpoint_slow()
                .unwrap()
                .iter()
                .map(|x| fmt_f64(*x))
                .collect::<Vec<_>>()
                .join(" "),
        );

    if sim.m > 1 {
        let obs = cfg.observable();
        let stats = mc_observable_mean(&model, &sim.x0, v0, sim.t_end, h, &obs, sim.m, sim.seed)?;
        s.section("monte_carlo")
            .kv("observable", obs.name())
            .kv("m", stats.m)
            .kv_f64("mean", stats.mean)
            .kv_f64("variance", stats.variance)
            .kv_f64("se", stats.se);
    }
    config_echo_section(&mut s, cfg);
    write(out_dir, "simulate_summary.txt", &s.render())?;
    println!(
        "simulate: wrote trajectory.csv ({} samples, {} jumps) to {}",
        traj.len(),
        traj.jump_times.len(),
        out_dir.display()
    );
    Ok(())
}

/// `converge`: weak-error, fast-decay and sequence-gap experiments.
pub fn cmd_converge(cfg: &RunConfig, out_dir: &Path) -> CmdResult {
    if cfg.experiment.lambda_grid.is_empty() {
        return Err(CmdError::Validation(
            "experiment.lambda_grid: must not be empty".into(),
        ));
    }
    let registry = ModelRegistry::with_builtins();
    let model_section = cfg.model.clone();
    let builder = move |lambda: f64| registry.build(&model_section.spec_at_lambda(lambda));
    let model = build_model(cfg)?;
    let anchor = cfg.anchor();
    let obs = cfg.observable();

    let weak = weak_error_experiment(
        &builder,
        &anchor,
        &cfg.simulation.v0,
        cfg.experiment.t,
        cfg.experiment.t / cfg.simulation.rk4_steps as f64,
        &obs,
        &cfg.experiment.lambda_grid,
        cfg.experiment.m,
        cfg.simulation.seed,
        cfg.measure_mode(),
    )?;
    write(out_dir, "weak_error.csv", &weak.to_csv())?;

    let decay_grid: Vec<(f64, f64)> = cfg
        .experiment
        .decay_t_grid
        .iter()
        .map(|&t| (t, cfg.experiment.decay_lambda))
        .collect();
    let decay = fast_decay_experiment(&model, &anchor, &cfg.simulation.v0, &decay_grid)?;
    write(out_dir, "decay.csv", &decay.to_csv())?;

    let certificate = certify_with_target(
        &model.family,
        &cfg.certification_grid(),
        cfg.analysis.max_steps,
        cfg.analysis.z0_target,
    )?;
    let mut seqgap = sequence_gap_experiment(
        &model,
        &certificate,
        &anchor,
        &cfg.simulation.v0,
        &cfg.experiment.delta_grid,
        &cfg.gap_direction(),
        cfg.experiment.t,
        cfg.experiment.gap_lambda,
    )?;
    if !cfg.experiment.t0_lambdas.is_empty() {
        seqgap.t0_points = coupled_marginal_distance_at_t0(
            &builder,
            &anchor,
            &cfg.simulation.v0,
            &cfg.experiment.t0_lambdas,
            cfg.experiment.t / cfg.simulation.rk4_steps as f64,
            cfg.experiment.t0_m,
            cfg.simulation.seed,
        )?;
    }
    write(out_dir, "seqgap.csv", &seqgap.to_csv())?;

    let mut s = Summary::new();
    s.raw(weak.to_summary().trim_end().to_string());
    s.raw(String::new());
    s.raw(decay.to_summary().trim_end().to_string());
    s.raw(String::new());
    s.raw(seqgap.to_summary().trim_end().to_string());

    // the averaged ODE admits two readings of where the class measure is
    // evaluated; report how far the branch endpoints drift apart
    if !model.family.constant_in_x() {
        use slowfast::sim::averaged_branch_path;
        use slowfast::MeasureMode;
        let base = slowfast::analyze_at(&model.family, &anchor)?;
        s.section("measure_mode_gap");
        for class in 0..base.decomposition.class_count() {
            let h = cfg.experiment.t / cfg.simulation.rk4_steps as f64;
            let a = averaged_branch_path(
                &model,
                &base,
                class,
                &anchor,
                cfg.experiment.t,
                h,
                MeasureMode::StateDependent,
            )?;
            let b = averaged_branch_path(
                &model,
                &base,
                class,
                &anchor,
                cfg.experiment.t,
                h,
                MeasureMode::AnchoredAtX0,
            )?;
            let gap: f64 = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).sum();
            s.kv(&format!("class_{class}_endpoint_gap_1norm"), fmt_f64(gap));
        }
    }
    config_echo_section(&mut s, cfg);
    write(out_dir, "converge_summary.txt", &s.render())?;
    println!(
        "converge: wrote weak_error.csv, decay.csv, seqgap.csv to {}",
        out_dir.display()
    );
    Ok(())
}

/// `verify`: the full acceptance suite; exit 0 iff every criterion passes.
pub fn cmd_verify(cfg: &RunConfig, out_dir: &Path) -> CmdResult {
    let acceptance_cfg = AcceptanceConfig {
        seed: cfg.simulation.seed,
        m: cfg.experiment.m,
        lambda_grid: cfg.experiment.lambda_grid.clone(),
    };
    let report = run_all(&acceptance_cfg);
    for r in &report.results {
        println!("{}", r.status_line());
    }
    write(out_dir, "acceptance.csv", &report.to_csv())?;
    let mut s = Summary::new();
    s.raw(report.to_summary().trim_end().to_string());
    config_echo_section(&mut s, cfg);
    write(out_dir, "acceptance_summary.txt", &s.render())?;
    if report.all_passed() {
        println!("verify: all criteria passed");
        Ok(())
    } else {
        println!("verify: FAILED");
        Err(CmdError::AcceptanceFailed)
    }
}
