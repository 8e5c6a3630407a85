//! Trajectory CSV and JSON summaries.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::classify::Outcome;
use super::integrator::{FlowSpec, Trajectory};
use crate::error::{Error, Result};
use crate::topology::{winding_invariant, ThresholdReport, WindingInvariant};

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Input(format!("write failed: {e}"))
}

/// Writes `t, agent_id, x0, x1, ..., potential, grad_norm`, one row per agent
/// and sample. Coordinates are flattened column-major; agent ids are 1-based.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let width = traj.states.first().map_or(0, |s| s.coords()[0].len());
    let mut header = vec!["t".to_string(), "agent_id".to_string()];
    header.extend((0..width).map(|k| format!("x{k}")));
    header.extend(["potential".to_string(), "grad_norm".to_string()]);
    w.write_record(&header).map_err(io_err)?;
    for ((t, s), (p, g)) in traj.times.iter().zip(&traj.states).zip(traj.potentials.iter().zip(&traj.grad_norms)) {
        for (i, x) in s.coords().iter().enumerate() {
            let mut row = vec![format!("{t:.6}"), (i + 1).to_string()];
            row.extend(x.iter().map(|v| format!("{v:.17e}")));
            row.push(format!("{p:.17e}"));
            row.push(format!("{g:.17e}"));
            w.write_record(&row).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// JSON summary of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySummary {
    pub algorithm: String,
    pub manifold: String,
    pub n_agents: usize,
    pub outcome: Outcome,
    pub initial_potential: f64,
    pub final_potential: f64,
    pub final_grad_norm: f64,
    pub steps: usize,
    pub converged: bool,
    pub winding_start: Option<WindingInvariant>,
    pub winding_end: Option<WindingInvariant>,
    /// Winding equal at every sample (`None` without a designated cycle).
    pub winding_conserved: Option<bool>,
    pub max_potential_increase: f64,
    pub dt_bound_violations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdReport>,
    pub wall_time_s: f64,
}

impl TrajectorySummary {
    pub fn new(traj: &Trajectory, spec: &FlowSpec, threshold: Option<ThresholdReport>) -> Self {
        let order = spec.cycle();
        let windings: Vec<Option<WindingInvariant>> = match &order {
            Some(o) => traj.states.iter().map(|s| winding_invariant(s, o).ok()).collect(),
            None => Vec::new(),
        };
        let first = traj.states.first().expect("trajectory has samples");
        Self {
            algorithm: spec.algorithm.to_string(),
            manifold: first.manifold().to_string(),
            n_agents: first.len(),
            outcome: traj.outcome.clone(),
            initial_potential: traj.potentials[0],
            final_potential: traj.final_potential(),
            final_grad_norm: traj.final_grad_norm(),
            steps: traj.steps_taken,
            converged: traj.converged,
            winding_start: windings.first().copied().flatten(),
            winding_end: windings.last().copied().flatten(),
            winding_conserved: order.map(|_| windings.windows(2).all(|w| w[0] == w[1] && w[0].is_some())),
            max_potential_increase: traj.max_potential_increase,
            dt_bound_violations: traj.dt_bound_violations,
            threshold,
            wall_time_s: traj.wall_time_s,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(io_err)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Input(format!("bad summary: {e}")))
    }
}
