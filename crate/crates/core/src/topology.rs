//! Closed broken geodesics, winding invariants, the chordal radius `A` and
//! the no-consensus threshold checks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::potentials::{potential_chordal, potential_geodesic};
use crate::dynamics::{Algorithm, SmoothingProfile, SystemState};
use crate::error::{input, Error, Result};
use crate::graphs::NetworkGraph;
use crate::linalg::{complexify, unitary_angles};
use crate::manifolds::{ManifoldPoint, ManifoldSpec};

/// Cyclic sequence of agents joined by their unique minimizing geodesics.
#[derive(Debug, Clone)]
pub struct PiecewiseGeodesic {
    pub vertices: Vec<ManifoldPoint>,
    pub segment_lengths: Vec<f64>,
    pub total_length: f64,
}

fn check_order(state: &SystemState, order: &[usize]) -> Result<()> {
    if order.is_empty() {
        return input("cycle order is empty");
    }
    if order.iter().any(|&i| i == 0 || i > state.len()) {
        return input("cycle order refers to a missing agent");
    }
    Ok(())
}

/// Consecutive pairs `(a, b)` (0-based) along the cycle, wrapping.
fn segments(order: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    let k = order.len();
    (0..k).map(move |i| (order[i] - 1, order[(i + 1) % k] - 1))
}

/// Builds the closed broken geodesic through the agents in `cycle_order` (1-based).
pub fn closed_broken_geodesic(state: &SystemState, cycle_order: &[usize]) -> Result<PiecewiseGeodesic> {
    check_order(state, cycle_order)?;
    let m = state.manifold();
    let r = m.injectivity_radius();
    let x = state.coords();
    let mut lengths = Vec::with_capacity(cycle_order.len());
    for (a, b) in segments(cycle_order) {
        let d = m.dist(&x[a], &x[b]);
        if d >= r || m.log(&x[a], &x[b]).is_err() {
            return Err(Error::Domain(format!(
                "broken geodesic not unique: agents {} and {} are {d:.6} apart (R = {r:.6})",
                a + 1,
                b + 1
            )));
        }
        lengths.push(d);
    }
    Ok(PiecewiseGeodesic {
        vertices: cycle_order.iter().map(|&i| state.point(i - 1)).collect(),
        total_length: lengths.iter().sum(),
        segment_lengths: lengths,
    })
}

/// Homotopy class of a closed broken geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindingInvariant {
    /// Circle, or `arg det` on the realified unitary group.
    Integer(i64),
    /// One winding number per circle factor of the flat torus.
    Pair(i64, i64),
    /// Simply connected (spheres) or not implemented (the Z2 class of SO(n)).
    Trivial,
}

impl WindingInvariant {
    pub fn is_nonzero(&self) -> bool {
        match *self {
            WindingInvariant::Integer(k) => k != 0,
            WindingInvariant::Pair(a, b) => a != 0 || b != 0,
            WindingInvariant::Trivial => false,
        }
    }
}

impl std::fmt::Display for WindingInvariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WindingInvariant::Integer(k) => write!(f, "{k}"),
            WindingInvariant::Pair(a, b) => write!(f, "({a},{b})"),
            WindingInvariant::Trivial => write!(f, "trivial"),
        }
    }
}

fn to_turns(total_angle: f64) -> i64 {
    (total_angle / (2.0 * PI)).round() as i64
}

fn factor_gap(x: &nalgebra::DMatrix<f64>, y: &nalgebra::DMatrix<f64>, k: usize) -> f64 {
    (x[k] * y[k + 1] - x[k + 1] * y[k]).atan2(x[k] * y[k] + x[k + 1] * y[k + 1])
}

/// Winding invariant of the closed broken geodesic through `cycle_order`.
///
/// Sums the signed angle increments along each unique segment: the phase on
/// the circle, each factor angle on the torus and the sum of the principal
/// eigen-angles of `U_i^* U_{i+1}` (the increment of `arg det`) on U(n).
pub fn winding_invariant(state: &SystemState, cycle_order: &[usize]) -> Result<WindingInvariant> {
    closed_broken_geodesic(state, cycle_order)?;
    let x = state.coords();
    Ok(match state.manifold() {
        ManifoldSpec::Circle => WindingInvariant::Integer(to_turns(segments(cycle_order).map(|(a, b)| factor_gap(&x[a], &x[b], 0)).sum())),
        ManifoldSpec::FlatTorus(..) => {
            let (mut s1, mut s2) = (0.0, 0.0);
            for (a, b) in segments(cycle_order) {
                s1 += factor_gap(&x[a], &x[b], 0);
                s2 += factor_gap(&x[a], &x[b], 2);
            }
            WindingInvariant::Pair(to_turns(s1), to_turns(s2))
        }
        ManifoldSpec::UnitaryRealified(_) => {
            let total: f64 = segments(cycle_order)
                .map(|(a, b)| {
                    let u = complexify(&x[a]);
                    let w = complexify(&x[b]);
                    unitary_angles(&(u.adjoint() * w)).iter().sum::<f64>()
                })
                .sum();
            WindingInvariant::Integer(to_turns(total))
        }
        ManifoldSpec::Sphere(_) | ManifoldSpec::SpecialOrthogonal(_) => WindingInvariant::Trivial,
    })
}

/// Margin subtracted from numerically located minima so the result is a lower bound.
pub const CHORDAL_RADIUS_CERTIFICATION: f64 = 1e-3;

pub(crate) fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}


/// Minimizes `chord(angles)` over angle vectors with `sum angles^2 = rho^2`,
/// `0 <= angle <= pi`: dense sampling on the positive orthant then
/// coordinate refinement.
fn min_over_angle_sphere(m: usize, rho: f64, chord2: impl Fn(&[f64]) -> f64) -> f64 {
    let feasible = |t: &[f64]| t.iter().all(|&a| a <= PI + 1e-12);
    let mut best = f64::INFINITY;
    let mut best_t = vec![0.0; m];
    // axis directions
    for k in 0..m {
        let mut t = vec![0.0; m];
        t[k] = rho;
        if feasible(&t) {
            let v = chord2(&t);
            if v < best {
                best = v;
                best_t = t;
            }
        }
    }
    // dense grid over the orthant via stars-and-bars on squared shares
    let steps = match m {
        1 => 1,
        2 => 2000,
        3 => 120,
        _ => 30,
    };
    let mut shares = vec![0usize; m];
    fn rec(k: usize, left: usize, shares: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if k + 1 == shares.len() {
            shares[k] = left;
            visit(shares);
            return;
        }
        for s in 0..=left {
            shares[k] = s;
            rec(k + 1, left - s, shares, visit);
        }
    }
    if m > 1 {
        let mut visit = |sh: &[usize]| {
            let t: Vec<f64> = sh.iter().map(|&s| rho * (s as f64 / steps as f64).sqrt()).collect();
            if feasible(&t) {
                let v = chord2(&t);
                if v < best {
                    best = v;
                    best_t = t;
                }
            }
        };
        rec(0, steps, &mut shares, &mut visit);
    }
    // local refinement: rotate mass between pairs of coordinates
    for _ in 0..4 {
        for p in 0..m {
            for q in p + 1..m {
                let r2 = best_t[p].powi(2) + best_t[q].powi(2);
                if r2 == 0.0 {
                    continue;
                }
                let r = r2.sqrt();
                let phi0 = best_t[q].atan2(best_t[p]);
                let eval = |phi: f64| {
                    let mut t = best_t.clone();
                    t[p] = r * phi.cos();
                    t[q] = r * phi.sin();
                    if feasible(&t) {
                        chord2(&t)
                    } else {
                        f64::INFINITY
                    }
                };
                let span = 0.05;
                let (phi, v) = golden_section(eval, (phi0 - span).max(0.0), (phi0 + span).min(PI / 2.0), 1e-12);
                if v < best {
                    best = v;
                    best_t[p] = r * phi.cos();
                    best_t[q] = r * phi.sin();
                }
            }
        }
    }
    best
}

/// Radius `A` of the largest chordal ball that fits in every geodesic ball of radius `R`.
///
/// Exact (`2`) on the unit circle and spheres. Elsewhere the chordal distance
/// is minimized over the geodesic sphere of radius `R`, reduced by symmetry to
/// the factor angles (torus) or the eigen-angles (matrix groups), and the
/// minimum is lowered by [`CHORDAL_RADIUS_CERTIFICATION`].
pub fn chordal_radius(m: &ManifoldSpec) -> f64 {
    let r = m.injectivity_radius();
    match *m {
        ManifoldSpec::Circle | ManifoldSpec::Sphere(_) => 2.0,
        ManifoldSpec::FlatTorus(r1, r2) => {
            // point at geodesic distance R in direction phi has factor angles
            // (R cos(phi) / r1, R sin(phi) / r2), both <= pi since R <= pi min(r1, r2)
            let chord2 = |phi: f64| {
                let a = r * phi.cos() / r1;
                let b = r * phi.sin() / r2;
                4.0 * r1 * r1 * (0.5 * a).sin().powi(2) + 4.0 * r2 * r2 * (0.5 * b).sin().powi(2)
            };
            let n = 4096;
            let mut best = (0.0, f64::INFINITY);
            for k in 0..=n {
                let phi = 0.5 * PI * k as f64 / n as f64;
                let v = chord2(phi);
                if v < best.1 {
                    best = (phi, v);
                }
            }
            let h = 0.5 * PI / n as f64;
            let (_, v) = golden_section(chord2, (best.0 - h).max(0.0), (best.0 + h).min(0.5 * PI), 1e-13);
            v.min(best.1).sqrt() - CHORDAL_RADIUS_CERTIFICATION
        }
        ManifoldSpec::SpecialOrthogonal(n) => {
            // rotation planes with angles t_k: d^2 = 2 sum t_k^2, chord^2 = 8 sum sin^2(t_k / 2)
            let planes = n / 2;
            let rho = r / 2f64.sqrt();
            let v = min_over_angle_sphere(planes, rho, |t| t.iter().map(|a| 8.0 * (0.5 * a).sin().powi(2)).sum());
            v.sqrt() - CHORDAL_RADIUS_CERTIFICATION
        }
        ManifoldSpec::UnitaryRealified(n) => {
            // eigen-angles t_k: d^2 = 2 sum t_k^2, chord^2 = 4 sum |1 - e^{i t_k}|^2; signs are irrelevant
            let rho = r / 2f64.sqrt();
            let v = min_over_angle_sphere(n, rho, |t| t.iter().map(|a| 8.0 * (0.5 * a).sin().powi(2)).sum());
            v.sqrt() - CHORDAL_RADIUS_CERTIFICATION
        }
    }
}

/// Outcome of the no-consensus threshold test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub potential: f64,
    pub bound: f64,
    pub pass: bool,
    pub winding: Option<WindingInvariant>,
    pub margin: f64,
}

impl ThresholdReport {
    /// Both hypotheses hold: the potential is under the bound and the
    /// designated cycle is not contractible.
    pub fn guarantees_no_consensus(&self) -> bool {
        self.pass && self.winding.is_some_and(|w| w.is_nonzero())
    }
}

/// Compares the relevant potential with its no-consensus bound:
/// `V < min w (R - eps)^2 / 2` for the geodesic flow and
/// `U < min w A^2 / 2` for the chordal flow (and its Kuramoto/Lohe forms).
pub fn threshold_check(
    state: &SystemState,
    graph: &NetworkGraph,
    algorithm: Algorithm,
    profile: &SmoothingProfile,
    cycle_order: Option<&[usize]>,
) -> Result<ThresholdReport> {
    let w_min = graph.min_weight();
    let (potential, bound) = match algorithm {
        Algorithm::GeodesicConsensus => {
            let plain = profile.plain_radius();
            (potential_geodesic(state, graph, profile)?, 0.5 * w_min * plain * plain)
        }
        Algorithm::ChordalConsensus | Algorithm::KuramotoPolar | Algorithm::LoheComplex => {
            let a = chordal_radius(&state.manifold());
            (potential_chordal(state, graph)?, 0.5 * w_min * a * a)
        }
    };
    let order = cycle_order.map(<[usize]>::to_vec).or_else(|| graph.default_cycle_order());
    let winding = order.and_then(|o| winding_invariant(state, &o).ok());
    Ok(ThresholdReport { potential, bound, pass: potential < bound, winding, margin: bound - potential })
}
