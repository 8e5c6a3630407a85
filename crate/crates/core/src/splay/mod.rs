//! Closed geodesics, splay states and their stability.

mod geodesics;
mod probe;
mod qp;

pub use geodesics::{ClosedGeodesicSpec, GeodesicDescriptor};
pub use probe::{stability_probe, ProbeReport, RETURN_TOL};
pub use qp::{partition_objective, solve_partition_qp, PartitionSolution};

use nalgebra::DMatrix;

use crate::dynamics::{flow_velocity, max_norm, FlowSpec, SmoothingProfile, SystemState};
use crate::error::{input, Error, Result};
use crate::graphs::NetworkGraph;
use crate::topology::golden_section;

/// A closed geodesic and the cycle whose agents partition it.
#[derive(Debug, Clone, PartialEq)]
pub struct SplayConfig {
    pub geodesic: ClosedGeodesicSpec,
    pub graph: NetworkGraph,
    /// Designated cycle (1-based agent ids).
    pub cycle_order: Vec<usize>,
    pub profile: SmoothingProfile,
}

impl SplayConfig {
    /// Uses the graph's natural ring and the default cutoff for the manifold.
    pub fn new(geodesic: ClosedGeodesicSpec, graph: NetworkGraph) -> Result<Self> {
        let order = graph.default_cycle_order().ok_or_else(|| Error::Input("graph has no ring 1-2-...-N-1".into()))?;
        let profile = SmoothingProfile::for_manifold(&geodesic.manifold);
        Self::with_order(geodesic, graph, order, profile)
    }

    pub fn with_order(
        geodesic: ClosedGeodesicSpec,
        graph: NetworkGraph,
        cycle_order: Vec<usize>,
        profile: SmoothingProfile,
    ) -> Result<Self> {
        if cycle_order.len() != graph.n_agents() || !graph.contains_cycle_order(&cycle_order) {
            return input("cycle order must visit every agent along graph edges");
        }
        Ok(Self { geodesic, graph, cycle_order, profile })
    }

    /// Weights `w_{o_i, o_{i+1}}` along the designated cycle.
    pub fn cycle_weights(&self) -> Vec<f64> {
        self.graph.cycle_weights(&self.cycle_order).expect("order validated against the graph")
    }

    /// Segment lengths `d_i = (w_i^-1 / sum_j w_j^-1) L`.
    pub fn spacing(&self) -> Result<Vec<f64>> {
        Ok(solve_partition_qp(&self.cycle_weights(), self.geodesic.length)?.d)
    }

    /// Fails unless every segment is shorter than `R - eps`.
    pub fn check(&self) -> Result<()> {
        let limit = self.profile.plain_radius();
        for (i, d) in self.spacing()?.iter().enumerate() {
            if *d >= limit {
                return Err(Error::Construction(format!(
                    "splay segment {} has length {d:.6} >= R - eps = {limit:.6}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    fn positions(&self, shift: f64) -> Result<Vec<DMatrix<f64>>> {
        self.check()?;
        let d = self.spacing()?;
        let n = self.graph.n_agents();
        let mut pts = vec![DMatrix::zeros(0, 0); n];
        let mut s = shift;
        for (k, &agent) in self.cycle_order.iter().enumerate() {
            pts[agent - 1] = self.geodesic.point_at(s);
            s += d[k];
        }
        Ok(pts)
    }
}

/// Places the agents along the geodesic at the splay spacing, the first agent
/// of the cycle at the base point.
pub fn construct_splay(config: &SplayConfig) -> Result<SystemState> {
    construct_splay_shifted(config, 0.0)
}

/// As [`construct_splay`], with every agent moved by arc length `shift`.
pub fn construct_splay_shifted(config: &SplayConfig, shift: f64) -> Result<SystemState> {
    let pts = config.positions(shift)?;
    SystemState::new(config.geodesic.manifold, pts)
}

/// Whether the largest velocity norm of `flow` at `state` is below `tol`; also
/// returns that norm.
pub fn is_equilibrium(state: &SystemState, flow: &FlowSpec, tol: f64) -> Result<(bool, f64)> {
    let v = max_norm(&flow_velocity(state, flow)?);
    Ok((v < tol, v))
}

/// Distance from `state` to the set of shifted splay states,
/// `min_s max_i d(x_i, splay_i(s))`.
///
/// The shift is located on a grid over one period and refined by
/// golden-section search to `1e-10`.
pub fn splay_set_distance(state: &SystemState, config: &SplayConfig) -> Result<f64> {
    if state.manifold() != config.geodesic.manifold || state.len() != config.graph.n_agents() {
        return input("state does not match the splay configuration");
    }
    config.check()?;
    let m = state.manifold();
    let d = config.spacing()?;
    let offsets: Vec<f64> = std::iter::once(0.0).chain(d.iter().scan(0.0, |acc, x| {
        *acc += x;
        Some(*acc)
    })).take(d.len()).collect();
    let x = state.coords();
    let objective = |s: f64| {
        config
            .cycle_order
            .iter()
            .zip(&offsets)
            .map(|(&a, &o)| m.dist(&x[a - 1], &config.geodesic.point_at(s + o)))
            .fold(0.0, f64::max)
    };
    let l = config.geodesic.length;
    let grid = 64 * state.len().max(4);
    let h = l / grid as f64;
    let (mut best_s, mut best) = (0.0, f64::INFINITY);
    for k in 0..grid {
        let s = k as f64 * h;
        let v = objective(s);
        if v < best {
            best = v;
            best_s = s;
        }
    }
    let (_, refined) = golden_section(objective, best_s - h, best_s + h, 1e-10);
    Ok(best.min(refined))
}
