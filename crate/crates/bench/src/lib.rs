//! Fixtures shared by the benchmarks.

use msync_core::manifolds::{random_point, ManifoldSpec};
use msync_core::splay::{construct_splay, ClosedGeodesicSpec};
use msync_core::{NetworkGraph, SplayConfig, SystemState};

/// `n` independent points from consecutive seeds.
pub fn random_state(m: ManifoldSpec, n: usize, seed: u64) -> SystemState {
    SystemState::from_points((0..n as u64).map(|i| random_point(m, seed + i)).collect()).expect("sampled points are on the manifold")
}

/// Uniform splay state on the first loop of the circle, with its configuration.
pub fn circle_splay(n: usize) -> (SplayConfig, SystemState) {
    let c = SplayConfig::new(ClosedGeodesicSpec::circle(1).expect("q = 1 loop"), NetworkGraph::cycle(n, &[]).expect("n >= 3"))
        .expect("cycle has a ring order");
    let s = construct_splay(&c).expect("spacing below the radius");
    (c, s)
}
