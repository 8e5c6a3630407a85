//! The single-run subcommands.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use msync_core::dynamics::export::{write_trajectory_csv, TrajectorySummary};
use msync_core::dynamics::{finite_difference_gradient, flow_potential, flow_velocity, relative_error};
use msync_core::manifolds::{random_point_with, ManifoldSpec, TangentVector};
use msync_core::splay::{construct_splay, is_equilibrium, solve_partition_qp, stability_probe, GeodesicDescriptor, ProbeReport};
use msync_core::topology::{threshold_check, winding_invariant};
use msync_core::{integrate, Algorithm, Error, FlowSpec, NetworkGraph, SystemState, ThresholdReport, Trajectory, WindingInvariant};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, InitialCondition};
use crate::failure::Failure;

/// Relative error a gradient check has to stay under.
pub const GRADCHECK_TOL: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;

pub struct RunResult {
    pub trajectory: Trajectory,
    pub threshold: ThresholdReport,
    pub summary: TrajectorySummary,
}

/// Integrates one configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult, Error> {
    let p = cfg.prepare()?;
    let order = p.flow.cycle();
    let threshold = threshold_check(&p.initial, &p.flow.graph, p.flow.algorithm, &p.profile, order.as_deref())?;
    let trajectory = integrate(&p.initial, &p.flow)?;
    let summary = TrajectorySummary::new(&trajectory, &p.flow, Some(threshold.clone()));
    Ok(RunResult { trajectory, threshold, summary })
}

pub fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let run = run_experiment(cfg)?;
    fs::create_dir_all(out)?;
    write_trajectory_csv(&run.trajectory, BufWriter::new(File::create(out.join("trajectory.csv"))?))?;
    fs::write(out.join("summary.json"), run.summary.to_json()? + "\n")?;
    let s = &run.summary;
    crate::emit(&format!(
        "{} on {} with {} agents: {} after {} steps, V {:.6e} -> {:.6e}, grad {:.3e}",
        s.algorithm, s.manifold, s.n_agents, s.outcome.kind, s.steps, s.initial_potential, s.final_potential, s.final_grad_norm
    ))?;
    log::info!("threshold report: {:?}", run.threshold);
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct GradcheckReport {
    pub manifold: String,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub max_relative_error: f64,
    pub pass: bool,
}

/// Compares the flow velocity with a central-difference gradient of the flow
/// potential at `trials` random states.
pub fn gradcheck(m: ManifoldSpec, algorithm: Algorithm, graph: NetworkGraph, trials: usize, seed: u64) -> Result<GradcheckReport, Failure> {
    m.validate()?;
    let flow = FlowSpec::new(algorithm, graph);
    flow.validate(&m, flow.graph.n_agents())?;
    if trials == 0 {
        log::warn!("gradcheck with zero trials passes vacuously");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let s = SystemState::from_points((0..flow.graph.n_agents()).map(|_| random_point_with(m, &mut rng)).collect())?;
        let analytic: Vec<TangentVector> = flow_velocity(&s, &flow)?
            .into_iter()
            .map(|v| TangentVector { coords: -v.coords, base: v.base })
            .collect();
        let potential = |x: &SystemState| flow_potential(x, &flow).unwrap_or(f64::NAN);
        let fd = finite_difference_gradient(&s, potential, FD_STEP)?;
        let e = relative_error(&analytic, &fd);
        worst = if e.is_nan() { f64::INFINITY } else { worst.max(e) };
    }
    Ok(GradcheckReport { manifold: m.to_string(), algorithm, trials, max_relative_error: worst, pass: worst < GRADCHECK_TOL })
}

#[derive(Debug, Serialize)]
pub struct SplayReport {
    pub manifold: String,
    pub descriptor: GeodesicDescriptor,
    pub length: f64,
    pub is_local_min_length: bool,
    pub cycle_order: Vec<usize>,
    pub spacing: Vec<f64>,
    pub velocity_norm: f64,
    pub is_equilibrium: bool,
    pub potential: f64,
    pub winding: WindingInvariant,
    pub threshold: ThresholdReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeReport>,
}

/// Builds the configured splay state, checks that it is an equilibrium and
/// optionally probes its stability.
pub fn splay(cfg: &ExperimentConfig, probe_trials: usize, magnitude: f64, out: &Path) -> Result<SplayReport, Failure> {
    let InitialCondition::Splay { geodesic, sigma } = &cfg.initial_condition else {
        return Err(Failure::config("the splay command needs a splay initial condition"));
    };
    if *sigma > 0.0 {
        log::warn!("splay noise sigma = {sigma} is ignored; the exact splay state is analysed");
    }
    let p = cfg.prepare()?;
    let config = p.splay.clone().expect("a splay initial condition yields a splay configuration");
    let state = construct_splay(&config)?;
    let (eq, v) = is_equilibrium(&state, &p.flow, 1e-10)?;
    let threshold = threshold_check(&state, &p.flow.graph, p.flow.algorithm, &p.profile, Some(&config.cycle_order))?;
    let probe = if probe_trials > 0 { Some(stability_probe(&state, &config, &p.flow, magnitude, probe_trials, cfg.seed)?) } else { None };
    let report = SplayReport {
        manifold: cfg.manifold.to_string(),
        descriptor: *geodesic,
        length: config.geodesic.length,
        is_local_min_length: config.geodesic.is_local_min_length,
        cycle_order: config.cycle_order.clone(),
        spacing: config.spacing()?,
        velocity_norm: v,
        is_equilibrium: eq,
        potential: flow_potential(&state, &p.flow)?,
        winding: winding_invariant(&state, &config.cycle_order)?,
        threshold,
        probe,
    };
    fs::create_dir_all(out)?;
    write_state_csv(&state, &out.join("splay_state.csv"))?;
    fs::write(out.join("splay.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(report)
}

fn write_state_csv(state: &SystemState, path: &Path) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path)?;
    let width = state.coords()[0].len();
    let mut header = vec!["agent_id".to_string()];
    header.extend((0..width).map(|k| format!("x{k}")));
    w.write_record(&header)?;
    for (i, x) in state.coords().iter().enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(x.iter().map(|v| format!("{v:.17e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn qp(weights: &[f64], length: f64) -> Result<String, Failure> {
    let s = solve_partition_qp(weights, length)?;
    Ok(serde_json::to_string(&s)?)
}

