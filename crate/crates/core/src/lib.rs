//! Consensus and multistability on Riemannian manifolds.
//!
//! Agents on a catalog manifold (circle, spheres, flat tori, SO(n) and the
//! realified unitary group) follow the geodesic or chordal consensus flow of
//! a weighted graph. Splay states on closed geodesics and the winding
//! invariants of closed broken geodesics describe the equilibria that are not
//! consensus.

// negated comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod graphs;
pub mod linalg;
pub mod manifolds;
pub mod splay;
pub mod topology;

pub use dynamics::{
    classify_outcome, integrate, Algorithm, FlowSpec, Outcome, OutcomeKind, SmoothingProfile, SystemState, Trajectory,
};
pub use error::{Error, Result};
pub use graphs::{GraphSpec, NetworkGraph};
pub use manifolds::{ManifoldPoint, ManifoldSpec, TangentVector};
pub use splay::{ClosedGeodesicSpec, SplayConfig};
pub use topology::{ThresholdReport, WindingInvariant};
