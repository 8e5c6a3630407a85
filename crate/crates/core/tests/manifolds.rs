use std::f64::consts::PI;

use msync_core::linalg::{complex_structure_residual, complexify, realify};
use msync_core::manifolds::{
    exp_map, geodesic_distance, log_map, metric_inner, project_tangent, random_point, random_point_with, random_tangent,
    random_tangent_with, ManifoldPoint, ManifoldSpec, TangentVector,
};
use msync_core::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn catalog() -> Vec<ManifoldSpec> {
    vec![
        ManifoldSpec::Circle,
        ManifoldSpec::Sphere(2),
        ManifoldSpec::Sphere(4),
        ManifoldSpec::FlatTorus(1.0, 1.0),
        ManifoldSpec::FlatTorus(1.0, 0.5),
        ManifoldSpec::SpecialOrthogonal(2),
        ManifoldSpec::SpecialOrthogonal(3),
        ManifoldSpec::SpecialOrthogonal(4),
        ManifoldSpec::UnitaryRealified(1),
        ManifoldSpec::UnitaryRealified(2),
        ManifoldSpec::UnitaryRealified(3),
    ]
}

#[test]
fn exp_log_inversion() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in catalog() {
        let r = m.injectivity_radius();
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let x = random_point_with(m, &mut rng);
            let len = rng.random_range(0.0..0.9 * r);
            let v = random_tangent_with(&x, len, &mut rng);
            let y = exp_map(&x, &v).unwrap();
            assert!(m.on_manifold(&y.coords, 1e-10));
            let back = log_map(&x, &y).unwrap();
            worst = worst.max((back.coords - &v.coords).norm());
        }
        assert!(worst < 1e-9, "{m}: {worst:e}");
    }
}

#[test]
fn gradient_of_squared_distance_is_minus_twice_log() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = 1e-5;
    for m in catalog() {
        let r = m.injectivity_radius();
        for _ in 0..20 {
            let x = random_point_with(m, &mut rng);
            let v = random_tangent_with(&x, rng.random_range(0.05..0.85 * r), &mut rng);
            let y = m.exp(&x.coords, &v.coords);
            let mut fd = DMatrix::zeros(x.coords.nrows(), x.coords.ncols());
            for e in m.tangent_basis(&x.coords) {
                let fp = m.dist2(&m.exp(&x.coords, &(&e * h)), &y);
                let fm = m.dist2(&m.exp(&x.coords, &(&e * -h)), &y);
                fd += e * ((fp - fm) / (2.0 * h));
            }
            let analytic = m.log(&x.coords, &y).unwrap() * -2.0;
            let rel = (&fd - &analytic).norm() / analytic.norm();
            assert!(rel < 1e-6, "{m}: {rel:e}");
        }
    }
}

#[test]
fn chordal_never_exceeds_geodesic() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for m in catalog() {
        for _ in 0..300 {
            let x = random_point_with(m, &mut rng);
            let y = random_point_with(m, &mut rng);
            let c = m.chordal(&x.coords, &y.coords);
            let d = m.dist(&x.coords, &y.coords);
            assert!(c <= d + 1e-12, "{m}: chord {c} > geodesic {d}");
            assert!(c > 0.0 && d > 0.0);
            assert_eq!(m.chordal(&x.coords, &x.coords), 0.0);
        }
    }
}

#[test]
fn projection_is_idempotent_and_self_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for m in catalog() {
        let (r, c) = m.ambient_shape();
        for _ in 0..50 {
            let x = random_point_with(m, &mut rng);
            let a = DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
            let b = DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
            let pa = project_tangent(&x, &a).unwrap();
            let pb = project_tangent(&x, &b).unwrap();
            assert!((project_tangent(&x, &pa.coords).unwrap().coords - &pa.coords).norm() < 1e-12, "{m}");
            // <P a, b> = <a, P b> in the ambient Frobenius product
            let lhs = pa.coords.dot(&b);
            let rhs = a.dot(&pb.coords);
            assert!((lhs - rhs).abs() < 1e-12, "{m}");
            assert!((metric_inner(&x, &pa, &pb).unwrap() - pa.coords.dot(&pb.coords)).abs() < 1e-15);
        }
    }
}

#[test]
fn projection_examples() {
    let x = ManifoldPoint::base(ManifoldSpec::Sphere(2));
    let p = project_tangent(&x, &DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 0.0])).unwrap();
    assert_eq!(p.coords, DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.0]));
    let i = ManifoldPoint::base(ManifoldSpec::SpecialOrthogonal(2));
    let p = project_tangent(&i, &DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0])).unwrap();
    assert!((p.coords - DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])).norm() < 1e-15);
}

#[test]
fn realified_unitaries_are_closed_under_products_and_exp() {
    let m = ManifoldSpec::UnitaryRealified(3);
    for seed in 0..20 {
        let a = random_point(m, seed).coords;
        let b = random_point(m, seed + 100).coords;
        let ab = &a * &b;
        assert!(m.on_manifold(&ab, 1e-10));
        assert!(complex_structure_residual(&ab) < 1e-12);
        assert!((realify(&(complexify(&a) * complexify(&b))) - &ab).norm() < 1e-12);
        let v = random_tangent(&ManifoldPoint::new(m, a.clone()).unwrap(), 2.0, seed);
        let e = m.exp(&a, &v.coords);
        assert!(m.on_manifold(&e, 1e-10));
        assert!(complex_structure_residual(&e) < 1e-12);
        assert!((e.determinant() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn log_fails_near_cut_locus() {
    let m = ManifoldSpec::SpecialOrthogonal(3);
    let i = ManifoldPoint::base(m);
    let gen = |t: f64| DMatrix::from_row_slice(3, 3, &[0.0, -t, 0.0, t, 0.0, 0.0, 0.0, 0.0, 0.0]);
    // rotation by angle theta sits at distance sqrt(2) theta
    let near = exp_map(&i, &TangentVector::new(&i, gen(PI - 1e-3)).unwrap()).unwrap();
    assert!(log_map(&i, &near).is_ok());
    let at = exp_map(&i, &TangentVector::new(&i, gen(PI)).unwrap()).unwrap();
    assert!(matches!(log_map(&i, &at), Err(Error::Domain(_))));

    let t = ManifoldSpec::FlatTorus(1.0, 0.5);
    let r = t.injectivity_radius();
    let x = ManifoldPoint::base(t);
    let ok = ManifoldPoint::torus(1.0, 0.5, 0.0, 0.99 * r / 0.5);
    assert!((geodesic_distance(&x, &ok).unwrap() - 0.99 * r).abs() < 1e-12);
    assert!(log_map(&x, &ok).is_ok());
    let bad = ManifoldPoint::torus(1.0, 0.5, 0.0, PI);
    assert!(log_map(&x, &bad).is_err());
}

#[test]
fn sampling_is_deterministic() {
    for m in catalog() {
        assert_eq!(random_point(m, 5), random_point(m, 5));
        assert!(m.on_manifold(&random_point(m, 5).coords, 1e-10));
        assert!(random_tangent(&random_point(m, 5), 0.0, 3).norm() == 0.0);
    }
}

proptest! {
    #[test]
    fn circle_distance_matches_wrapped_gap(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let x = ManifoldPoint::circle(a);
        let y = ManifoldPoint::circle(b);
        let gap = msync_core::linalg::wrap_angle(b - a).abs();
        prop_assert!((geodesic_distance(&x, &y).unwrap() - gap).abs() < 1e-9);
    }

    #[test]
    fn torus_exp_log_round_trip(a in -PI..PI, b in -PI..PI, u in -1.0f64..1.0, v in -1.0f64..1.0) {
        let m = ManifoldSpec::FlatTorus(1.0, 0.5);
        let x = ManifoldPoint::torus(1.0, 0.5, a, b);
        let t = project_tangent(&x, &DMatrix::from_column_slice(4, 1, &[u, v, v, u])).unwrap();
        let n = t.norm();
        prop_assume!(n > 1e-6);
        let t = TangentVector::new(&x, &t.coords * (0.9 * m.injectivity_radius() * n.min(1.0) / n)).unwrap();
        let back = log_map(&x, &exp_map(&x, &t).unwrap()).unwrap();
        prop_assert!((back.coords - t.coords).norm() < 1e-9);
    }

    #[test]
    fn manifold_json_round_trip(kind in 0usize..5, n in 1usize..5, r1 in 0.1f64..3.0, r2 in 0.1f64..3.0) {
        let m = match kind {
            0 => ManifoldSpec::Circle,
            1 => ManifoldSpec::Sphere(n),
            2 => ManifoldSpec::FlatTorus(r1, r2),
            3 => ManifoldSpec::SpecialOrthogonal(n + 1),
            _ => ManifoldSpec::UnitaryRealified(n),
        };
        let s = serde_json::to_string(&m).unwrap();
        prop_assert_eq!(serde_json::from_str::<ManifoldSpec>(&s).unwrap(), m);
    }
}
