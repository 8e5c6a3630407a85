//! Kuramoto oscillators on a cycle in polar coordinates.

use nalgebra::DMatrix;

use crate::error::{input, Result};
use crate::graphs::NetworkGraph;

fn check(thetas: &[f64], graph: &NetworkGraph, omegas: &[f64]) -> Result<()> {
    if !graph.is_cycle() {
        return input("polar Kuramoto model needs a cycle graph");
    }
    if thetas.len() != graph.n_agents() {
        return input("one phase per node expected");
    }
    if !omegas.is_empty() && omegas.len() != thetas.len() {
        return input("one natural frequency per node expected (or none)");
    }
    Ok(())
}

/// `dtheta_i = omega_i + w_{i,i+1} sin(theta_{i+1} - theta_i) + w_{i-1,i} sin(theta_{i-1} - theta_i)`.
///
/// An empty `omegas` slice means all frequencies are zero.
pub fn kuramoto_polar(thetas: &[f64], graph: &NetworkGraph, omegas: &[f64]) -> Result<Vec<f64>> {
    check(thetas, graph, omegas)?;
    Ok(rhs(thetas, graph, omegas))
}

pub(crate) fn rhs(thetas: &[f64], graph: &NetworkGraph, omegas: &[f64]) -> Vec<f64> {
    graph
        .adjacency()
        .iter()
        .enumerate()
        .map(|(i, nbrs)| {
            let om = omegas.get(i).copied().unwrap_or(0.0);
            om + nbrs.iter().map(|&(j, w)| w * (thetas[j] - thetas[i]).sin()).sum::<f64>()
        })
        .collect()
}

/// Jacobian of [`kuramoto_polar`] with respect to the phases.
pub fn kuramoto_jacobian(thetas: &[f64], graph: &NetworkGraph) -> Result<DMatrix<f64>> {
    check(thetas, graph, &[])?;
    let n = thetas.len();
    let mut j = DMatrix::zeros(n, n);
    for (i, nbrs) in graph.adjacency().iter().enumerate() {
        for &(k, w) in nbrs {
            let c = w * (thetas[k] - thetas[i]).cos();
            j[(i, k)] += c;
            j[(i, i)] -= c;
        }
    }
    Ok(j)
}

/// Classical RK4 on the phases; returns sample times and phases.
pub fn integrate_kuramoto(
    thetas: &[f64],
    graph: &NetworkGraph,
    omegas: &[f64],
    dt: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    check(thetas, graph, omegas)?;
    if !(dt > 0.0) || t_end < dt || sample_every == 0 {
        return input("need dt > 0, t_end >= dt and sample_every >= 1");
    }
    let steps = (t_end / dt).round() as usize;
    let mut th = thetas.to_vec();
    let mut times = vec![0.0];
    let mut samples = vec![th.clone()];
    let axpy = |a: &[f64], k: &[f64], h: f64| a.iter().zip(k).map(|(x, y)| x + h * y).collect::<Vec<_>>();
    for step in 1..=steps {
        let k1 = rhs(&th, graph, omegas);
        let k2 = rhs(&axpy(&th, &k1, 0.5 * dt), graph, omegas);
        let k3 = rhs(&axpy(&th, &k2, 0.5 * dt), graph, omegas);
        let k4 = rhs(&axpy(&th, &k3, dt), graph, omegas);
        for i in 0..th.len() {
            th[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if step % sample_every == 0 || step == steps {
            times.push(step as f64 * dt);
            samples.push(th.clone());
        }
    }
    Ok((times, samples))
}
