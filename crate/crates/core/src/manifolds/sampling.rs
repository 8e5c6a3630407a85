//! Seeded sampling of points and tangent vectors.
//!
//! All randomness goes through `ChaCha8Rng` seeded with `seed_from_u64`, so a
//! seed gives the same stream on every platform.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ManifoldPoint, ManifoldSpec, TangentVector};
use crate::linalg::{realify, CMatrix};

fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Uniform (Haar / area) sample from the manifold.
pub fn random_point_with<R: Rng + ?Sized>(m: ManifoldSpec, rng: &mut R) -> ManifoldPoint {
    let coords = match m {
        ManifoldSpec::Circle | ManifoldSpec::Sphere(_) => {
            let (r, _) = m.ambient_shape();
            loop {
                let g = gaussian(r, 1, rng);
                let n = g.norm();
                if n > 1e-12 {
                    break g / n;
                }
            }
        }
        ManifoldSpec::FlatTorus(a, b) => {
            let t1: f64 = rng.random_range(0.0..2.0 * PI);
            let t2: f64 = rng.random_range(0.0..2.0 * PI);
            DMatrix::from_column_slice(4, 1, &[a * t1.cos(), a * t1.sin(), b * t2.cos(), b * t2.sin()])
        }
        ManifoldSpec::SpecialOrthogonal(n) => {
            let (q, r) = gaussian(n, n, rng).qr().unpack();
            let mut q = q;
            for j in 0..n {
                if r[(j, j)] < 0.0 {
                    q.column_mut(j).neg_mut();
                }
            }
            if q.determinant() < 0.0 {
                q.column_mut(0).neg_mut();
            }
            q
        }
        ManifoldSpec::UnitaryRealified(n) => {
            let z = CMatrix::from_fn(n, n, |_, _| {
                Complex::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
            });
            let (q, r) = z.qr().unpack();
            let mut q = q;
            for j in 0..n {
                let d = r[(j, j)];
                let phase = if d.norm() > 0.0 { d / Complex::new(d.norm(), 0.0) } else { Complex::new(1.0, 0.0) };
                for i in 0..n {
                    q[(i, j)] *= phase;
                }
            }
            realify(&q)
        }
    };
    let coords = m.renormalize(&coords);
    ManifoldPoint::new_unchecked(m, coords)
}

pub fn random_point(m: ManifoldSpec, seed: u64) -> ManifoldPoint {
    random_point_with(m, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Tangent vector with uniformly random direction and Frobenius norm `scale`.
pub fn random_tangent_with<R: Rng + ?Sized>(x: &ManifoldPoint, scale: f64, rng: &mut R) -> TangentVector {
    if scale == 0.0 {
        return x.zero_tangent();
    }
    let (r, c) = x.manifold.ambient_shape();
    loop {
        let v = x.manifold.project(&x.coords, &gaussian(r, c, rng));
        let n = v.norm();
        if n > 1e-12 {
            return TangentVector { base: x.clone(), coords: v * (scale / n) };
        }
    }
}

pub fn random_tangent(x: &ManifoldPoint, scale: f64, seed: u64) -> TangentVector {
    random_tangent_with(x, scale, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Isotropic Gaussian tangent vector: each coordinate in an orthonormal tangent
/// basis is N(0, sigma^2).
pub fn gaussian_tangent<R: Rng + ?Sized>(x: &ManifoldPoint, sigma: f64, rng: &mut R) -> TangentVector {
    let mut v = x.zero_tangent();
    for e in x.manifold.tangent_basis(&x.coords) {
        let c: f64 = rng.sample(StandardNormal);
        v.coords += e * (sigma * c);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    const CATALOG: [ManifoldSpec; 6] = [
        ManifoldSpec::Circle,
        ManifoldSpec::Sphere(3),
        ManifoldSpec::FlatTorus(1.0, 0.5),
        ManifoldSpec::SpecialOrthogonal(3),
        ManifoldSpec::UnitaryRealified(1),
        ManifoldSpec::UnitaryRealified(2),
    ];

    #[test]
    fn samples_are_on_manifold_and_deterministic() {
        for m in CATALOG {
            for seed in 0..20 {
                let p = random_point(m, seed);
                assert!(m.on_manifold(&p.coords, 1e-10), "{m} seed {seed}");
                assert_eq!(p, random_point(m, seed));
            }
        }
    }

    #[test]
    fn tangents_have_requested_norm() {
        for m in CATALOG {
            let x = random_point(m, 7);
            let v = random_tangent(&x, 0.3, 9);
            assert!((v.norm() - 0.3).abs() < 1e-12);
            assert!((m.project(&x.coords, &v.coords) - &v.coords).norm() < 1e-12);
            assert_eq!(random_tangent(&x, 0.0, 9).norm(), 0.0);
        }
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        for m in CATALOG {
            let x = random_point(m, 3);
            let b = m.tangent_basis(&x.coords);
            assert_eq!(b.len(), m.dimension());
            for (i, u) in b.iter().enumerate() {
                for (j, v) in b.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((u.dot(v) - expect).abs() < 1e-12);
                }
            }
        }
    }
}
