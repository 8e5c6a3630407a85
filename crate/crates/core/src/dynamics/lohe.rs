//! Driftless Lohe model on U(n) in complex coordinates.

use nalgebra::{Complex, DMatrix};

use super::rkmk::rkmk4_step;
use crate::error::{input, Result};
use crate::graphs::NetworkGraph;
pub use crate::linalg::{complexify, realify, CMatrix};

const UNITARY_TOL: f64 = 1e-8;

fn check_units(units: &[CMatrix], graph: &NetworkGraph) -> Result<()> {
    if units.len() != graph.n_agents() {
        return input("one unitary per node expected");
    }
    let n = units[0].nrows();
    for (i, u) in units.iter().enumerate() {
        if u.shape() != (n, n) {
            return input("all unitaries must be square of the same size");
        }
        let dev = (u.adjoint() * u - CMatrix::identity(n, n)).norm();
        if dev > UNITARY_TOL {
            return input(format!("agent {} is not unitary (deviation {dev:.3e})", i + 1));
        }
    }
    Ok(())
}

fn velocity(units: &[CMatrix], graph: &NetworkGraph) -> Vec<CMatrix> {
    let half = Complex::new(0.5, 0.0);
    graph
        .adjacency()
        .iter()
        .enumerate()
        .map(|(i, nbrs)| {
            let ui = &units[i];
            let mut acc = ui * Complex::new(0.0, 0.0);
            for &(j, w) in nbrs {
                let uj = &units[j];
                acc += (uj - ui * uj.adjoint() * ui) * Complex::new(w, 0.0);
            }
            acc * half
        })
        .collect()
}

/// `dU_i = 1/2 sum_j w_ij (U_j - U_i U_j^* U_i)`.
pub fn lohe_complex(units: &[CMatrix], graph: &NetworkGraph) -> Result<Vec<CMatrix>> {
    check_units(units, graph)?;
    Ok(velocity(units, graph))
}

/// Right-invariant generators `Omega_i = dU_i U_i^*` (skew-Hermitian).
pub(crate) fn algebra(units: &[CMatrix], graph: &NetworkGraph) -> Vec<CMatrix> {
    let half = Complex::new(0.5, 0.0);
    graph
        .adjacency()
        .iter()
        .enumerate()
        .map(|(i, nbrs)| {
            let ui = &units[i];
            let mut acc = ui * Complex::new(0.0, 0.0);
            for &(j, w) in nbrs {
                let uj = &units[j];
                let t = uj * ui.adjoint();
                acc += (&t - t.adjoint()) * Complex::new(w, 0.0);
            }
            acc * half
        })
        .collect()
}

pub(crate) fn act(omega: &CMatrix, u: &CMatrix) -> CMatrix {
    if omega.nrows() == 1 {
        let z = omega[(0, 0)];
        let rot = Complex::new(0.0, z.im).exp();
        return u * rot;
    }
    omega.clone().exp() * u
}

/// Integrates the Lohe model with the same group integrator used for the
/// realified chordal flow. Returns sample times and sampled unitaries.
pub fn integrate_lohe(
    units: &[CMatrix],
    graph: &NetworkGraph,
    dt: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<(Vec<f64>, Vec<Vec<CMatrix>>)> {
    check_units(units, graph)?;
    if !(dt > 0.0) || t_end < dt || sample_every == 0 {
        return input("need dt > 0, t_end >= dt and sample_every >= 1");
    }
    let abelian = units[0].nrows() == 1;
    let steps = (t_end / dt).round() as usize;
    let mut u = units.to_vec();
    let mut times = vec![0.0];
    let mut samples = vec![u.clone()];
    for step in 1..=steps {
        let k1 = algebra(&u, graph);
        u = rkmk4_step(&u, k1, dt, |p: &[CMatrix]| Ok(algebra(p, graph)), act, abelian)?;
        if step % sample_every == 0 || step == steps {
            times.push(step as f64 * dt);
            samples.push(u.clone());
        }
    }
    Ok((times, samples))
}

/// Complex phase of a 1x1 unitary.
pub fn phase(u: &DMatrix<Complex<f64>>) -> f64 {
    u[(0, 0)].arg()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scalar(theta: f64) -> CMatrix {
        CMatrix::from_element(1, 1, Complex::new(0.0, theta).exp())
    }

    #[test]
    fn realify_basics() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(realify(&i2), DMatrix::<f64>::identity(4, 4));
        let j = CMatrix::from_element(1, 1, Complex::new(0.0, 1.0));
        assert_eq!(realify(&j), DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
    }

    #[test]
    fn realify_is_a_homomorphism() {
        let a = CMatrix::from_fn(2, 2, |i, j| Complex::new(i as f64 + 0.3, j as f64 - 0.7));
        let b = CMatrix::from_fn(2, 2, |i, j| Complex::new((i * j) as f64 - 0.2, 0.5 + i as f64));
        assert!((realify(&(&a * &b)) - realify(&a) * realify(&b)).norm() < 1e-13);
        let lin = &a * Complex::new(2.0, 0.0) + &b * Complex::new(-3.0, 0.0);
        assert!((realify(&lin) - (realify(&a) * 2.0 - realify(&b) * 3.0)).norm() < 1e-13);
        assert!((complexify(&realify(&a)) - a).norm() == 0.0);
    }

    #[test]
    fn equal_units_are_fixed() {
        let g = NetworkGraph::cycle(4, &[]).unwrap();
        let u = vec![scalar(0.7); 4];
        assert!(lohe_complex(&u, &g).unwrap().iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn scalar_case_is_kuramoto_coupling() {
        let g = NetworkGraph::cycle(3, &[]).unwrap();
        let th = [0.2, 1.5, -2.0];
        let u: Vec<_> = th.iter().map(|&t| scalar(t)).collect();
        let v = lohe_complex(&u, &g).unwrap();
        for i in 0..3 {
            // angular component of dU_i is Im(conj(U_i) dU_i)
            let rate = (u[i][(0, 0)].conj() * v[i][(0, 0)]).im;
            let expect: f64 = [(i + 1) % 3, (i + 2) % 3].iter().map(|&j| (th[j] - th[i]).sin()).sum();
            assert!((rate - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let g = NetworkGraph::cycle(3, &[]).unwrap();
        let mut u = vec![scalar(0.0); 3];
        u[1] = CMatrix::from_element(1, 1, Complex::new(1.1, 0.0));
        assert!(lohe_complex(&u, &g).is_err());
    }

    #[test]
    fn integration_keeps_unitarity() {
        let g = NetworkGraph::cycle(3, &[]).unwrap();
        let u: Vec<_> = [0.0, 2.0, 4.0].iter().map(|&t| scalar(t * PI / 3.0)).collect();
        let (_, s) = integrate_lohe(&u, &g, 1e-2, 1.0, 10).unwrap();
        for ui in s.last().unwrap() {
            assert!((ui[(0, 0)].norm() - 1.0).abs() < 1e-12);
        }
    }
}
