use std::f64::consts::PI;

use msync_core::dynamics::{flow_velocity, max_norm, potential_chordal, potential_geodesic};
use msync_core::manifolds::{geodesic_distance, random_point, ManifoldPoint, ManifoldSpec};
use msync_core::splay::{
    construct_splay, construct_splay_shifted, is_equilibrium, partition_objective, solve_partition_qp,
    splay_set_distance, ClosedGeodesicSpec,
};
use msync_core::topology::{chordal_radius, closed_broken_geodesic, threshold_check, winding_invariant};
use msync_core::{Algorithm, Error, FlowSpec, NetworkGraph, SmoothingProfile, SplayConfig, SystemState, WindingInvariant};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn catalog() -> Vec<ClosedGeodesicSpec> {
    vec![
        ClosedGeodesicSpec::circle(1).unwrap(),
        ClosedGeodesicSpec::circle(2).unwrap(),
        ClosedGeodesicSpec::torus(1.0, 1.0, 1, 0).unwrap(),
        ClosedGeodesicSpec::torus(1.0, 1.0, 1, 1).unwrap(),
        ClosedGeodesicSpec::torus(1.0, 0.5, 0, 1).unwrap(),
        ClosedGeodesicSpec::great_circle(2, 1).unwrap(),
        ClosedGeodesicSpec::great_circle(3, 1).unwrap(),
        ClosedGeodesicSpec::subgroup(ManifoldSpec::SpecialOrthogonal(2), 1).unwrap(),
        ClosedGeodesicSpec::subgroup(ManifoldSpec::SpecialOrthogonal(3), 1).unwrap(),
        ClosedGeodesicSpec::subgroup(ManifoldSpec::UnitaryRealified(1), 1).unwrap(),
        ClosedGeodesicSpec::subgroup(ManifoldSpec::UnitaryRealified(2), 1).unwrap(),
    ]
}

fn weighted_cycle(n: usize, seed: u64) -> NetworkGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    NetworkGraph::cycle(n, &w).unwrap()
}

#[test]
fn catalog_geodesics_close() {
    for g in catalog() {
        assert!(g.manifold.dist(&g.point_at(g.length), &g.base.coords) < 1e-9, "{:?}", g.descriptor);
        assert!((g.direction.norm() - 1.0).abs() < 1e-14);
    }
    assert!(ClosedGeodesicSpec::circle(1).unwrap().is_local_min_length);
    assert!(ClosedGeodesicSpec::torus(1.0, 1.0, 1, 0).unwrap().is_local_min_length);
    assert!(!ClosedGeodesicSpec::great_circle(2, 1).unwrap().is_local_min_length);
    assert!(ClosedGeodesicSpec::circle(0).is_err());
    assert!(ClosedGeodesicSpec::torus(1.0, 1.0, 0, 0).is_err());
}

#[test]
fn qp_matches_lagrange_system() {
    let w = [1.0, 2.0, 2.0];
    let l = 5.0;
    // [2W 1; 1^T 0] [d; lambda] = [0; L]
    let n = w.len();
    let mut k = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        k[(i, i)] = 2.0 * w[i];
        k[(i, n)] = 1.0;
        k[(n, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = l;
    let sol = k.lu().solve(&rhs).unwrap();
    let qp = solve_partition_qp(&w, l).unwrap();
    for i in 0..n {
        assert!((sol[i] - qp.d[i]).abs() < 1e-12);
    }
    assert_eq!(qp.d, vec![2.5, 1.25, 1.25]);
}

#[test]
fn qp_beats_random_feasible_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let n = rng.random_range(1..12);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
        let l = rng.random_range(0.1..20.0);
        let s = solve_partition_qp(&w, l).unwrap();
        let inv: f64 = w.iter().map(|x| 1.0 / x).sum();
        assert!((s.value - l * l / inv).abs() < 1e-12 * s.value.max(1.0));
        assert!((s.d.iter().sum::<f64>() - l).abs() < 1e-12 * l.max(1.0));
        assert!(s.d.iter().all(|d| *d > 0.0));
        for _ in 0..1000 {
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0) + 1e-9).collect();
            let total: f64 = raw.iter().sum();
            let d: Vec<f64> = raw.iter().map(|x| x * l / total).collect();
            assert!(partition_objective(&w, &d) >= s.value - 1e-12 * s.value);
        }
    }
    assert!(matches!(solve_partition_qp(&[1.0, 1.0], 0.0), Err(Error::Input(_))));
    assert!(matches!(solve_partition_qp(&[1.0, -1.0], 1.0), Err(Error::Input(_))));
}

#[test]
fn splay_construction_examples() {
    let c4 = SplayConfig::new(ClosedGeodesicSpec::circle(1).unwrap(), NetworkGraph::cycle(4, &[]).unwrap()).unwrap();
    let s = construct_splay(&c4).unwrap();
    for (i, p) in s.points().iter().enumerate() {
        assert!(geodesic_distance(p, &ManifoldPoint::circle(i as f64 * PI / 2.0)).unwrap() < 1e-12);
    }
    assert!((closed_broken_geodesic(&s, &[1, 2, 3, 4]).unwrap().total_length - 2.0 * PI).abs() < 1e-12);

    // the q-twisted state with phase 0
    let c3 = SplayConfig::new(ClosedGeodesicSpec::circle(1).unwrap(), NetworkGraph::cycle(3, &[]).unwrap()).unwrap();
    let s = construct_splay(&c3).unwrap();
    for (i, p) in s.points().iter().enumerate() {
        assert!(geodesic_distance(p, &ManifoldPoint::circle(2.0 * PI * i as f64 / 3.0)).unwrap() < 1e-12);
    }

    let t = SplayConfig::new(ClosedGeodesicSpec::torus(1.0, 1.0, 1, 0).unwrap(), NetworkGraph::cycle(8, &[]).unwrap()).unwrap();
    let s = construct_splay(&t).unwrap();
    let pts = s.points();
    for i in 0..8 {
        assert!((geodesic_distance(&pts[i], &pts[(i + 1) % 8]).unwrap() - PI / 4.0).abs() < 1e-10);
        assert!((pts[i].coords[2] - 1.0).abs() < 1e-15 && pts[i].coords[3].abs() < 1e-15);
    }

    // a double loop split among three agents leaves gaps of 4 pi / 3 > R - eps
    let too_few = SplayConfig::new(ClosedGeodesicSpec::circle(2).unwrap(), NetworkGraph::cycle(3, &[]).unwrap()).unwrap();
    assert!(matches!(construct_splay(&too_few), Err(Error::Construction(_))));
}

#[test]
fn weighted_spacing_matches_consecutive_distances() {
    for (k, g) in catalog().into_iter().enumerate() {
        let n = 12 + 2 * (g.length / (2.0 * PI)).ceil() as usize;
        let c = SplayConfig::new(g, weighted_cycle(n, k as u64)).unwrap();
        let s = construct_splay(&c).unwrap();
        let d = c.spacing().unwrap();
        let pg = closed_broken_geodesic(&s, &c.cycle_order).unwrap();
        for (a, b) in pg.segment_lengths.iter().zip(&d) {
            assert!((a - b).abs() < 1e-10, "{:?}: {a} vs {b}", c.geodesic.descriptor);
        }
        assert!((pg.total_length - c.geodesic.length).abs() < 1e-9);
    }
}

#[test]
fn splay_states_are_equilibria() {
    for (k, g) in catalog().into_iter().enumerate() {
        let n = 10 + 2 * (g.length / (2.0 * PI)).ceil() as usize;
        let graph = weighted_cycle(n, 100 + k as u64);
        let c = SplayConfig::new(g, graph.clone()).unwrap();
        let s = construct_splay(&c).unwrap();
        let flow = FlowSpec::new(Algorithm::GeodesicConsensus, graph);
        let (eq, v) = is_equilibrium(&s, &flow, 1e-10).unwrap();
        assert!(eq, "{:?}: velocity {v:e}", c.geodesic.descriptor);

        // weighted potential equals L^2 / (2 sum w^-1)
        let inv: f64 = c.cycle_weights().iter().map(|w| 1.0 / w).sum();
        let v = potential_geodesic(&s, &flow.graph, &c.profile).unwrap();
        assert!((v - 0.5 * c.geodesic.length.powi(2) / inv).abs() < 1e-10, "{:?}", c.geodesic.descriptor);
    }
}

#[test]
fn shifted_splay_states_form_a_continuum() {
    let g = NetworkGraph::cycle(9, &[1.0, 2.0, 0.5, 1.0, 1.5, 1.0, 0.8, 1.2, 1.0]).unwrap();
    for geo in [ClosedGeodesicSpec::circle(1).unwrap(), ClosedGeodesicSpec::torus(1.0, 0.7, 1, 1).unwrap()] {
        let c = SplayConfig::new(geo, g.clone()).unwrap();
        let flow = FlowSpec::new(Algorithm::GeodesicConsensus, g.clone());
        let base = construct_splay(&c).unwrap();
        let v0 = potential_geodesic(&base, &g, &c.profile).unwrap();
        for shift in [0.3, 1.7, -2.2] {
            let s = construct_splay_shifted(&c, shift).unwrap();
            assert!(is_equilibrium(&s, &flow, 1e-10).unwrap().0);
            assert!((potential_geodesic(&s, &g, &c.profile).unwrap() - v0).abs() < 1e-12);
            assert!(splay_set_distance(&s, &c).unwrap() < 1e-9);
        }
    }
}

#[test]
fn equilibrium_examples() {
    let g = NetworkGraph::cycle(8, &[]).unwrap();
    let flow = FlowSpec::new(Algorithm::GeodesicConsensus, g);
    let random = SystemState::from_points((0..8).map(|i| random_point(ManifoldSpec::Circle, i)).collect()).unwrap();
    assert!(!is_equilibrium(&random, &flow, 1e-10).unwrap().0);
    let c = SystemState::consensus(&ManifoldPoint::circle(2.0), 8);
    assert!(is_equilibrium(&c, &flow, 1e-10).unwrap().0);
}

fn twist(angles: impl Iterator<Item = f64>) -> SystemState {
    SystemState::circle_angles(&angles.collect::<Vec<_>>())
}

#[test]
fn winding_examples() {
    let order = [1, 2, 3, 4, 5];
    let q1 = twist((0..5).map(|i| 2.0 * PI * i as f64 / 5.0));
    assert_eq!(winding_invariant(&q1, &order).unwrap(), WindingInvariant::Integer(1));
    let q2 = twist((0..5).map(|i| 4.0 * PI * i as f64 / 5.0));
    assert_eq!(winding_invariant(&q2, &order).unwrap(), WindingInvariant::Integer(2));

    let torus = SystemState::consensus(&ManifoldPoint::torus(1.0, 0.5, 1.0, -2.0), 5);
    assert_eq!(winding_invariant(&torus, &order).unwrap(), WindingInvariant::Pair(0, 0));

    let c = SplayConfig::new(ClosedGeodesicSpec::torus(1.0, 1.0, 1, 1).unwrap(), NetworkGraph::cycle(12, &[]).unwrap()).unwrap();
    let order: Vec<usize> = (1..=12).collect();
    assert_eq!(winding_invariant(&construct_splay(&c).unwrap(), &order).unwrap(), WindingInvariant::Pair(1, 1));

    let c = SplayConfig::new(
        ClosedGeodesicSpec::subgroup(ManifoldSpec::UnitaryRealified(2), 1).unwrap(),
        NetworkGraph::cycle(12, &[]).unwrap(),
    )
    .unwrap();
    assert_eq!(winding_invariant(&construct_splay(&c).unwrap(), &order).unwrap(), WindingInvariant::Integer(1));

    let s = construct_splay(&SplayConfig::new(ClosedGeodesicSpec::great_circle(2, 1).unwrap(), NetworkGraph::cycle(12, &[]).unwrap()).unwrap())
        .unwrap();
    assert_eq!(winding_invariant(&s, &order).unwrap(), WindingInvariant::Trivial);
}

#[test]
fn winding_is_conserved_below_threshold() {
    let n = 16;
    let g = NetworkGraph::cycle(n, &[]).unwrap();
    let c = SplayConfig::new(ClosedGeodesicSpec::torus(1.0, 1.0, 1, 0).unwrap(), g.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let base = construct_splay(&c).unwrap();
    let tangents: Vec<_> = base
        .points()
        .iter()
        .map(|p| msync_core::manifolds::random_tangent_with(p, 0.1 * rng.random_range(0.0..1.0), &mut rng))
        .collect();
    let s = base.perturbed(&tangents).unwrap();
    let flow = FlowSpec::new(Algorithm::ChordalConsensus, g.clone()).with_dt(0.01).with_t_end(20.0).with_sample_every(10);
    let report = threshold_check(&s, &g, flow.algorithm, &c.profile, None).unwrap();
    assert!(report.guarantees_no_consensus(), "{report:?}");
    let t = msync_core::integrate(&s, &flow).unwrap();
    for x in &t.states {
        assert_eq!(winding_invariant(x, &c.cycle_order).unwrap(), WindingInvariant::Pair(1, 0));
    }
    assert_ne!(t.outcome.kind, msync_core::OutcomeKind::Consensus);
}

#[test]
fn threshold_examples() {
    let p = SmoothingProfile::for_manifold(&ManifoldSpec::Circle);
    let g20 = NetworkGraph::cycle(20, &[]).unwrap();
    let r = threshold_check(&twist((0..20).map(|i| 2.0 * PI * i as f64 / 20.0)), &g20, Algorithm::ChordalConsensus, &p, None).unwrap();
    assert!((r.potential - 10.0 * (2.0 * (PI / 20.0).sin()).powi(2)).abs() < 1e-12);
    assert!(r.pass && r.guarantees_no_consensus());
    assert!((r.bound - 2.0).abs() < 1e-15);

    let c = SystemState::consensus(&ManifoldPoint::circle(0.0), 20);
    let r = threshold_check(&c, &g20, Algorithm::ChordalConsensus, &p, None).unwrap();
    assert!(r.pass && !r.guarantees_no_consensus());
    assert_eq!(r.winding, Some(WindingInvariant::Integer(0)));

    let g3 = NetworkGraph::cycle(3, &[]).unwrap();
    let s3 = twist((0..3).map(|i| 2.0 * PI * i as f64 / 3.0));
    let r = threshold_check(&s3, &g3, Algorithm::ChordalConsensus, &p, None).unwrap();
    assert!((r.potential - 4.5).abs() < 1e-12);
    assert!(!r.pass && r.margin < 0.0);
    assert!((potential_chordal(&s3, &g3).unwrap() - r.potential).abs() < 1e-15);

    // geodesic bound uses (R - eps)^2 / 2
    let r = threshold_check(&s3, &g3, Algorithm::GeodesicConsensus, &p, None).unwrap();
    assert!((r.bound - 0.5 * (0.9 * PI).powi(2)).abs() < 1e-12);
    assert!(!r.pass);
}

#[test]
fn chordal_radius_examples() {
    assert_eq!(chordal_radius(&ManifoldSpec::Circle), 2.0);
    assert_eq!(chordal_radius(&ManifoldSpec::Sphere(2)), 2.0);
    let a = chordal_radius(&ManifoldSpec::FlatTorus(1.0, 1.0));
    assert!(a > 0.0 && a <= 2.0);
    for m in [ManifoldSpec::FlatTorus(1.0, 0.7), ManifoldSpec::SpecialOrthogonal(3), ManifoldSpec::UnitaryRealified(2)] {
        assert!(chordal_radius(&m) > 0.0);
    }
}

#[test]
fn cycle_is_a_subgraph_of_every_circulant() {
    for n in 5..12 {
        let cyc = NetworkGraph::cycle(n, &[]).unwrap();
        for k in 1..=(n - 1) / 2 {
            let circ = NetworkGraph::circulant(n, k, 1.0).unwrap();
            assert_eq!(circ.n_edges(), k * n);
            for (i, j, _) in cyc.edges() {
                assert!(circ.weight(i, j).is_some() && circ.weight(j, i).is_some());
            }
        }
    }
    let g = weighted_cycle(7, 1);
    for (i, j, w) in g.edges() {
        assert_eq!(g.weight(i, j), Some(w));
        assert_eq!(g.weight(j, i), Some(w));
    }
    assert_eq!(NetworkGraph::circulant(5, 1, 1.0).unwrap(), NetworkGraph::cycle(5, &[]).unwrap());
}

#[test]
fn splay_velocity_also_vanishes_for_chordal_flow_on_symmetric_loops() {
    // uniform weights make the chordal forces cancel too
    for g in catalog() {
        let n = 12 + 2 * (g.length / (2.0 * PI)).ceil() as usize;
        let graph = NetworkGraph::cycle(n, &[]).unwrap();
        let c = SplayConfig::new(g, graph.clone()).unwrap();
        let s = construct_splay(&c).unwrap();
        let v = max_norm(&flow_velocity(&s, &FlowSpec::new(Algorithm::ChordalConsensus, graph)).unwrap());
        assert!(v < 1e-10, "{:?}: {v:e}", c.geodesic.descriptor);
    }
}
