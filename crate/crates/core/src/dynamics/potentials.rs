//! Disagreement potentials and the velocity fields of the two consensus flows.

use nalgebra::DMatrix;

use super::smoothing::SmoothingProfile;
use super::state::SystemState;
use crate::error::{Error, Result};
use crate::graphs::NetworkGraph;
use crate::manifolds::{ManifoldSpec, TangentVector};

/// Contributions with cutoff weight below this are dropped when the log is
/// undefined; such edges sit within `CUT_LOCUS_MARGIN` of `R`.
const NEGLIGIBLE_CUTOFF: f64 = 1e-12;

fn check_sizes(state: &SystemState, graph: &NetworkGraph) -> Result<()> {
    if state.len() != graph.n_agents() {
        return Err(Error::Input(format!("state has {} agents but graph has {}", state.len(), graph.n_agents())));
    }
    Ok(())
}

/// `V = 1/2 sum_{ij} w_ij int_0^{d^2} f`.
pub fn potential_geodesic(state: &SystemState, graph: &NetworkGraph, profile: &SmoothingProfile) -> Result<f64> {
    check_sizes(state, graph)?;
    Ok(geodesic_potential_raw(state.manifold(), graph, profile, state.coords()))
}

/// `U = 1/2 sum_{ij} w_ij |X_i - X_j|^2`.
pub fn potential_chordal(state: &SystemState, graph: &NetworkGraph) -> Result<f64> {
    check_sizes(state, graph)?;
    Ok(chordal_potential_raw(graph, state.coords()))
}

pub(crate) fn geodesic_potential_raw(
    m: ManifoldSpec,
    graph: &NetworkGraph,
    profile: &SmoothingProfile,
    x: &[DMatrix<f64>],
) -> f64 {
    0.5 * graph.edges().map(|(i, j, w)| w * profile.integral(m.dist2(&x[i - 1], &x[j - 1]))).sum::<f64>()
}

pub(crate) fn chordal_potential_raw(graph: &NetworkGraph, x: &[DMatrix<f64>]) -> f64 {
    0.5 * graph.edges().map(|(i, j, w)| w * (&x[i - 1] - &x[j - 1]).norm_squared()).sum::<f64>()
}

/// Velocity of the geodesic consensus flow, `sum_j w_ij f(d^2) log_{x_i}(x_j)`.
pub(crate) fn geodesic_velocity_raw(
    m: ManifoldSpec,
    graph: &NetworkGraph,
    profile: &SmoothingProfile,
    x: &[DMatrix<f64>],
) -> Result<Vec<DMatrix<f64>>> {
    let (r, c) = m.ambient_shape();
    let mut v = vec![DMatrix::zeros(r, c); x.len()];
    for (i, j, w) in graph.edges() {
        let (a, b) = (i - 1, j - 1);
        let fv = profile.f(m.dist2(&x[a], &x[b]));
        if fv == 0.0 {
            continue;
        }
        match m.log_pair(&x[a], &x[b]) {
            Ok((lab, lba)) => {
                v[a] += lab * (w * fv);
                v[b] += lba * (w * fv);
            }
            Err(_) if fv < NEGLIGIBLE_CUTOFF => {}
            Err(e) => {
                return Err(Error::Domain(format!("log failed on edge {{{i},{j}}} inside the cutoff support: {e}")));
            }
        }
    }
    Ok(v)
}

/// Velocity of the chordal consensus flow, `-Pi_i sum_j w_ij (X_i - X_j)`.
pub(crate) fn chordal_velocity_raw(m: ManifoldSpec, graph: &NetworkGraph, x: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    let adj = graph.adjacency();
    x.iter()
        .enumerate()
        .map(|(i, xi)| {
            let mut s = xi * 0.0;
            for &(j, w) in &adj[i] {
                s += (&x[j] - xi) * w;
            }
            m.project(xi, &s)
        })
        .collect()
}

fn wrap(state: &SystemState, v: Vec<DMatrix<f64>>) -> Vec<TangentVector> {
    v.into_iter().enumerate().map(|(i, coords)| TangentVector { base: state.point(i), coords }).collect()
}

/// Right-hand side of the geodesic consensus flow (the negated gradient of `V`).
pub fn grad_geodesic(state: &SystemState, graph: &NetworkGraph, profile: &SmoothingProfile) -> Result<Vec<TangentVector>> {
    check_sizes(state, graph)?;
    let v = geodesic_velocity_raw(state.manifold(), graph, profile, state.coords())?;
    Ok(wrap(state, v))
}

/// Right-hand side of the chordal consensus flow (the negated gradient of `U`).
pub fn grad_chordal(state: &SystemState, graph: &NetworkGraph) -> Result<Vec<TangentVector>> {
    check_sizes(state, graph)?;
    Ok(wrap(state, chordal_velocity_raw(state.manifold(), graph, state.coords())))
}

pub fn max_norm(v: &[TangentVector]) -> f64 {
    v.iter().map(TangentVector::norm).fold(0.0, f64::max)
}
