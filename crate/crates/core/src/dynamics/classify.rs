use serde::{Deserialize, Serialize};

use super::integrator::Trajectory;
use super::state::SystemState;
use crate::graphs::NetworkGraph;
use crate::topology::{closed_broken_geodesic, winding_invariant, WindingInvariant};

/// Agents within this geodesic distance of a common point count as consensus.
pub const CONSENSUS_TOL: f64 = 1e-6;
/// Allowed deviation of edge lengths from the splay spacing.
pub const SPACING_TOL: f64 = 1e-4;
/// Shortest closed broken geodesic accepted as a loop on manifolds without a winding invariant.
const MIN_LOOP_LENGTH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutcomeKind {
    Consensus,
    SplayLike,
    OtherEquilibrium,
    NotConverged,
}

impl std::fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// Classification of a final state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub kind: OutcomeKind,
    /// `min_k max_i d(x_i, x_k)`.
    pub consensus_distance: f64,
    pub grad_norm: f64,
    pub winding: Option<WindingInvariant>,
    /// Largest deviation of an edge length from the splay spacing along the designated cycle.
    pub spacing_error: Option<f64>,
}

/// Distance to the consensus set, using agent positions as candidate points.
pub fn consensus_distance(state: &SystemState) -> f64 {
    let m = state.manifold();
    let x = state.coords();
    let mut best = f64::INFINITY;
    for xk in x {
        let mut worst: f64 = 0.0;
        for xi in x {
            worst = worst.max(m.dist(xi, xk));
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);
    }
    best
}

fn spacing_error(state: &SystemState, graph: &NetworkGraph, order: &[usize]) -> Option<(f64, f64)> {
    let pg = closed_broken_geodesic(state, order).ok()?;
    let w = graph.cycle_weights(order).ok()?;
    let inv_sum: f64 = w.iter().map(|w| 1.0 / w).sum();
    let err = pg
        .segment_lengths
        .iter()
        .zip(&w)
        .map(|(d, wi)| (d - pg.total_length / (wi * inv_sum)).abs())
        .fold(0.0, f64::max);
    Some((err, pg.total_length))
}

/// Classifies a state reached by a flow.
///
/// Consensus is decided by distance alone. Otherwise a state whose velocity
/// is still at least `grad_tol` is `NotConverged`; an equilibrium is
/// `SplayLike` when the designated cycle is a nontrivial loop (nonzero
/// winding, or positive length where no invariant is available) with
/// edge lengths at the splay spacing.
pub fn classify_state(
    state: &SystemState,
    grad_norm: f64,
    grad_tol: f64,
    graph: &NetworkGraph,
    cycle_order: Option<&[usize]>,
) -> Outcome {
    let consensus_distance = consensus_distance(state);
    let default_order = graph.default_cycle_order();
    let order = cycle_order.or(default_order.as_deref());
    let winding = order.and_then(|o| winding_invariant(state, o).ok());
    let spacing = order.and_then(|o| spacing_error(state, graph, o));
    let kind = if consensus_distance < CONSENSUS_TOL {
        OutcomeKind::Consensus
    } else if !(grad_norm < grad_tol) {
        OutcomeKind::NotConverged
    } else {
        let nontrivial = match (winding, spacing) {
            (Some(WindingInvariant::Trivial), Some((_, len))) => len > MIN_LOOP_LENGTH,
            (Some(w), _) => w.is_nonzero(),
            _ => false,
        };
        if nontrivial && spacing.is_some_and(|(e, _)| e < SPACING_TOL) {
            OutcomeKind::SplayLike
        } else {
            OutcomeKind::OtherEquilibrium
        }
    };
    Outcome { kind, consensus_distance, grad_norm, winding, spacing_error: spacing.map(|s| s.0) }
}

/// Classifies the final sample of a trajectory.
pub fn classify_outcome(traj: &Trajectory, graph: &NetworkGraph, cycle_order: Option<&[usize]>, grad_tol: f64) -> Outcome {
    classify_state(traj.final_state(), traj.final_grad_norm(), grad_tol, graph, cycle_order)
}
