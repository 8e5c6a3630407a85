//! Potentials, consensus flows, reference models and the integrator.

mod classify;
pub mod export;
mod fd;
mod integrator;
pub mod kuramoto;
pub mod lohe;
pub mod potentials;
mod rkmk;
mod smoothing;
mod state;

pub use classify::{classify_outcome, classify_state, consensus_distance, Outcome, OutcomeKind, CONSENSUS_TOL, SPACING_TOL};
pub use fd::{finite_difference_gradient, relative_error, RELATIVE_ERROR_FLOOR};
pub use integrator::{flow_potential, flow_velocity, integrate, Algorithm, FlowSpec, Trajectory, DRIFT_TOL};
pub use kuramoto::{integrate_kuramoto, kuramoto_jacobian, kuramoto_polar};
pub use lohe::{integrate_lohe, lohe_complex};
pub use potentials::{grad_chordal, grad_geodesic, max_norm, potential_chordal, potential_geodesic};
pub use smoothing::SmoothingProfile;
pub use state::{SystemState, STATE_TOL};
