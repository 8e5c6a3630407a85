use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::classify::{classify_state, Outcome};
use super::kuramoto;
use super::lohe::{self, complexify, realify, CMatrix};
use super::potentials::{chordal_potential_raw, chordal_velocity_raw, geodesic_potential_raw, geodesic_velocity_raw};
use super::rkmk::rkmk4_step;
use super::smoothing::SmoothingProfile;
use super::state::SystemState;
use crate::error::{input, Error, Result};
use crate::graphs::NetworkGraph;
use crate::manifolds::{ManifoldSpec, TangentVector};

/// Constraint residual after a step beyond which integration is aborted.
pub const DRIFT_TOL: f64 = 1e-6;

/// Residual above which a state is pulled back onto the manifold after a step.
const RENORMALIZE_ABOVE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Smoothed geodesic consensus, velocity `sum w f(d^2) log`.
    GeodesicConsensus,
    /// Chordal consensus, velocity `Pi sum w X_j`.
    ChordalConsensus,
    /// Lohe model on U(n) integrated in complex coordinates.
    LoheComplex,
    /// Kuramoto phases on a cycle, integrated in angles.
    KuramotoPolar,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::GeodesicConsensus => "geodesic_consensus",
            Algorithm::ChordalConsensus => "chordal_consensus",
            Algorithm::LoheComplex => "lohe_complex",
            Algorithm::KuramotoPolar => "kuramoto_polar",
        })
    }
}

/// Flow and integrator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub algorithm: Algorithm,
    pub graph: NetworkGraph,
    /// Cutoff for the geodesic flow; `None` uses [`SmoothingProfile::for_manifold`].
    pub profile: Option<SmoothingProfile>,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub grad_tol: f64,
    /// Designated cycle (1-based) for winding and spacing checks.
    pub cycle_order: Option<Vec<usize>>,
}

impl FlowSpec {
    /// Defaults: `dt = 1e-3`, `t_end = 10`, a sample every 100 steps, `grad_tol = 1e-9`.
    pub fn new(algorithm: Algorithm, graph: NetworkGraph) -> Self {
        Self { algorithm, graph, profile: None, dt: 1e-3, t_end: 10.0, sample_every: 100, grad_tol: 1e-9, cycle_order: None }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_sample_every(mut self, every: usize) -> Self {
        self.sample_every = every;
        self
    }

    pub fn with_grad_tol(mut self, tol: f64) -> Self {
        self.grad_tol = tol;
        self
    }

    pub fn with_profile(mut self, profile: SmoothingProfile) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn with_cycle_order(mut self, order: Vec<usize>) -> Self {
        self.cycle_order = Some(order);
        self
    }

    pub fn profile_for(&self, m: &ManifoldSpec) -> SmoothingProfile {
        self.profile.unwrap_or_else(|| SmoothingProfile::for_manifold(m))
    }

    /// Designated cycle: the explicit one or the graph's natural ring.
    pub fn cycle(&self) -> Option<Vec<usize>> {
        self.cycle_order.clone().or_else(|| self.graph.default_cycle_order())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self, m: &ManifoldSpec, n_agents: usize) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return input(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt) {
            return input(format!("t_end = {} is shorter than dt = {}", self.t_end, self.dt));
        }
        if self.sample_every == 0 {
            return input("sample_every must be at least 1");
        }
        if !(self.grad_tol >= 0.0) {
            return input("grad_tol must be nonnegative");
        }
        if self.graph.n_agents() != n_agents {
            return input(format!("state has {n_agents} agents but graph has {}", self.graph.n_agents()));
        }
        if let Some(order) = &self.cycle_order {
            if !self.graph.contains_cycle_order(order) {
                return input("cycle_order is not a cycle of the graph");
            }
        }
        match self.algorithm {
            Algorithm::KuramotoPolar if *m != ManifoldSpec::Circle => input("kuramoto_polar runs on the circle"),
            Algorithm::KuramotoPolar if !self.graph.is_cycle() => input("kuramoto_polar needs a cycle graph"),
            Algorithm::LoheComplex if !matches!(m, ManifoldSpec::UnitaryRealified(_)) => {
                input("lohe_complex runs on the realified unitary group")
            }
            _ => Ok(()),
        }
    }
}

/// Sampled flow line.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
    /// `V` for the geodesic flow, `U` otherwise.
    pub potentials: Vec<f64>,
    /// Largest agent velocity norm.
    pub grad_norms: Vec<f64>,
    pub outcome: Outcome,
    pub steps_taken: usize,
    /// Stopped because the velocity fell below `grad_tol`.
    pub converged: bool,
    /// Largest per-step increase of the potential (0 if it never increased).
    pub max_potential_increase: f64,
    /// Steps with `dt * max velocity >= R / 10`.
    pub dt_bound_violations: usize,
    pub wall_time_s: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &SystemState {
        self.states.last().expect("trajectory has at least one sample")
    }

    pub fn final_potential(&self) -> f64 {
        *self.potentials.last().expect("trajectory has at least one sample")
    }

    pub fn final_grad_norm(&self) -> f64 {
        *self.grad_norms.last().expect("trajectory has at least one sample")
    }

    /// Potential samples never rise by more than `tol` between consecutive steps.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.max_potential_increase < tol
    }
}

/// Velocity field of the chosen flow at `state`.
pub fn flow_velocity(state: &SystemState, spec: &FlowSpec) -> Result<Vec<TangentVector>> {
    let m = state.manifold();
    spec.validate(&m, state.len())?;
    let v = match spec.algorithm {
        Algorithm::GeodesicConsensus => geodesic_velocity_raw(m, &spec.graph, &spec.profile_for(&m), state.coords())?,
        _ => chordal_velocity_raw(m, &spec.graph, state.coords()),
    };
    Ok(v.into_iter().enumerate().map(|(i, coords)| TangentVector { base: state.point(i), coords }).collect())
}

/// Potential decreased by the chosen flow.
pub fn flow_potential(state: &SystemState, spec: &FlowSpec) -> Result<f64> {
    let m = state.manifold();
    spec.validate(&m, state.len())?;
    Ok(match spec.algorithm {
        Algorithm::GeodesicConsensus => geodesic_potential_raw(m, &spec.graph, &spec.profile_for(&m), state.coords()),
        _ => chordal_potential_raw(&spec.graph, state.coords()),
    })
}

trait Stepper {
    /// Largest velocity norm and potential at the current state; caches the field.
    fn eval(&mut self) -> Result<(f64, f64)>;
    fn step(&mut self, dt: f64) -> Result<()>;
    fn snapshot(&self) -> SystemState;
}

struct ManifoldStepper<'a> {
    m: ManifoldSpec,
    graph: &'a NetworkGraph,
    profile: Option<SmoothingProfile>,
    x: Vec<DMatrix<f64>>,
    k1: Option<Vec<DMatrix<f64>>>,
}

impl ManifoldStepper<'_> {
    fn velocity(&self, x: &[DMatrix<f64>]) -> Result<Vec<DMatrix<f64>>> {
        match &self.profile {
            Some(p) => geodesic_velocity_raw(self.m, self.graph, p, x)
                .map_err(|e| Error::Integrator(format!("geodesic field undefined: {e}"))),
            None => Ok(chordal_velocity_raw(self.m, self.graph, x)),
        }
    }

    fn algebra(&self, x: &[DMatrix<f64>]) -> Result<Vec<DMatrix<f64>>> {
        let v = self.velocity(x)?;
        Ok(x.iter().zip(&v).map(|(xi, vi)| self.m.lift(xi, vi)).collect())
    }
}

impl Stepper for ManifoldStepper<'_> {
    fn eval(&mut self) -> Result<(f64, f64)> {
        let v = self.velocity(&self.x)?;
        let vmax = v.iter().map(|vi| vi.norm()).fold(0.0, f64::max);
        let pot = match &self.profile {
            Some(p) => geodesic_potential_raw(self.m, self.graph, p, &self.x),
            None => chordal_potential_raw(self.graph, &self.x),
        };
        self.k1 = Some(self.x.iter().zip(&v).map(|(xi, vi)| self.m.lift(xi, vi)).collect());
        Ok((vmax, pot))
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        let k1 = match self.k1.take() {
            Some(k) => k,
            None => self.algebra(&self.x)?,
        };
        let m = self.m;
        let next = rkmk4_step(&self.x, k1, dt, |p: &[DMatrix<f64>]| self.algebra(p), |xi, x| m.act(xi, x), m.is_abelian())?;
        self.x = next
            .into_iter()
            .enumerate()
            .map(|(i, xi)| {
                let r = m.constraint_residual(&xi);
                if !(r <= DRIFT_TOL) {
                    return Err(Error::Integrator(format!("agent {} drifted off {m} (residual {r:.3e})", i + 1)));
                }
                Ok(if r > RENORMALIZE_ABOVE { m.renormalize(&xi) } else { xi })
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    fn snapshot(&self) -> SystemState {
        SystemState::new_unchecked(self.m, self.x.clone())
    }
}

struct KuramotoStepper<'a> {
    graph: &'a NetworkGraph,
    theta: Vec<f64>,
    k1: Option<Vec<f64>>,
}

impl Stepper for KuramotoStepper<'_> {
    fn eval(&mut self) -> Result<(f64, f64)> {
        let k = kuramoto::rhs(&self.theta, self.graph, &[]);
        let vmax = k.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let pot = self.graph.edges().map(|(i, j, w)| w * (1.0 - (self.theta[i - 1] - self.theta[j - 1]).cos())).sum();
        self.k1 = Some(k);
        Ok((vmax, pot))
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        let g = self.graph;
        let f = |t: &[f64]| kuramoto::rhs(t, g, &[]);
        let th = &self.theta;
        let k1 = self.k1.take().unwrap_or_else(|| f(th));
        let axpy = |k: &[f64], h: f64| th.iter().zip(k).map(|(x, y)| x + h * y).collect::<Vec<_>>();
        let k2 = f(&axpy(&k1, 0.5 * dt));
        let k3 = f(&axpy(&k2, 0.5 * dt));
        let k4 = f(&axpy(&k3, dt));
        for i in 0..self.theta.len() {
            self.theta[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        Ok(())
    }

    fn snapshot(&self) -> SystemState {
        SystemState::circle_angles(&self.theta)
    }
}

struct LoheStepper<'a> {
    m: ManifoldSpec,
    graph: &'a NetworkGraph,
    units: Vec<CMatrix>,
    k1: Option<Vec<CMatrix>>,
}

impl Stepper for LoheStepper<'_> {
    fn eval(&mut self) -> Result<(f64, f64)> {
        let omega = lohe::algebra(&self.units, self.graph);
        // Frobenius norms on the realified manifold carry a factor sqrt(2)
        let vmax = omega.iter().zip(&self.units).map(|(o, u)| (o * u).norm() * 2f64.sqrt()).fold(0.0, f64::max);
        let real: Vec<_> = self.units.iter().map(realify).collect();
        let pot = chordal_potential_raw(self.graph, &real);
        self.k1 = Some(omega);
        Ok((vmax, pot))
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        let g = self.graph;
        let k1 = self.k1.take().unwrap_or_else(|| lohe::algebra(&self.units, g));
        let abelian = self.units[0].nrows() == 1;
        self.units = rkmk4_step(&self.units, k1, dt, |p: &[CMatrix]| Ok(lohe::algebra(p, g)), lohe::act, abelian)?;
        for (i, u) in self.units.iter().enumerate() {
            let n = u.nrows();
            let dev = (u.adjoint() * u - CMatrix::identity(n, n)).norm();
            if !(dev <= DRIFT_TOL) {
                return Err(Error::Integrator(format!("agent {} drifted off U({n}) (deviation {dev:.3e})", i + 1)));
            }
        }
        Ok(())
    }

    fn snapshot(&self) -> SystemState {
        SystemState::new_unchecked(self.m, self.units.iter().map(realify).collect())
    }
}

/// Integrates the flow from `initial` with a fixed-step fourth-order
/// Runge-Kutta-Munthe-Kaas scheme (classical RK4 for the polar Kuramoto
/// model), sampling every `sample_every` steps and at the end.
///
/// Stops early once the largest velocity norm drops below `grad_tol`. Steps
/// with `dt * max velocity >= R / 10` are counted and reported.
pub fn integrate(initial: &SystemState, spec: &FlowSpec) -> Result<Trajectory> {
    let started = Instant::now();
    let m = initial.manifold();
    spec.validate(&m, initial.len())?;
    let r = initial.max_residual();
    if r > super::STATE_TOL {
        return input(format!("initial state is off {m} (residual {r:.3e})"));
    }
    let g = &spec.graph;
    let mut stepper: Box<dyn Stepper + '_> = match spec.algorithm {
        Algorithm::GeodesicConsensus => Box::new(ManifoldStepper {
            m,
            graph: g,
            profile: Some(spec.profile_for(&m)),
            x: initial.coords().to_vec(),
            k1: None,
        }),
        Algorithm::ChordalConsensus => {
            Box::new(ManifoldStepper { m, graph: g, profile: None, x: initial.coords().to_vec(), k1: None })
        }
        Algorithm::KuramotoPolar => Box::new(KuramotoStepper { graph: g, theta: initial.angles(), k1: None }),
        Algorithm::LoheComplex => {
            Box::new(LoheStepper { m, graph: g, units: initial.coords().iter().map(complexify).collect(), k1: None })
        }
    };

    let steps = spec.steps();
    let dt_bound = m.injectivity_radius() / 10.0;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut potentials = Vec::new();
    let mut grad_norms = Vec::new();
    let mut max_increase: f64 = 0.0;
    let mut violations = 0usize;
    let mut prev_pot: Option<f64> = None;
    let mut converged;
    let mut step = 0usize;
    loop {
        let (vmax, pot) = stepper.eval()?;
        if let Some(p) = prev_pot {
            max_increase = max_increase.max(pot - p);
        }
        prev_pot = Some(pot);
        converged = vmax < spec.grad_tol;
        let last = converged || step == steps;
        if step.is_multiple_of(spec.sample_every) || last {
            times.push(step as f64 * spec.dt);
            states.push(stepper.snapshot());
            potentials.push(pot);
            grad_norms.push(vmax);
        }
        if last {
            break;
        }
        if spec.dt * vmax >= dt_bound {
            if violations == 0 {
                log::warn!("step {step}: dt * |v| = {:.3e} exceeds R/10 = {dt_bound:.3e}", spec.dt * vmax);
            }
            violations += 1;
        }
        stepper.step(spec.dt)?;
        step += 1;
    }

    let order = spec.cycle();
    let final_state = states.last().expect("at least one sample");
    let outcome = classify_state(final_state, *grad_norms.last().unwrap(), spec.grad_tol, g, order.as_deref());
    log::debug!("{} finished after {step} steps: {:?}", spec.algorithm, outcome.kind);
    Ok(Trajectory {
        times,
        states,
        potentials,
        grad_norms,
        outcome,
        steps_taken: step,
        converged,
        max_potential_increase: max_increase,
        dt_bound_violations: violations,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}
