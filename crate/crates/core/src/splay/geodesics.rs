use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::manifolds::{ManifoldPoint, ManifoldSpec, TangentVector};

/// Catalog tag of a closed geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeodesicDescriptor {
    /// The unit circle traversed `q` times.
    Loops { q: i64 },
    /// Flat torus line winding `p` times around the first factor and `q` around the second.
    TorusWinding { p: i64, q: i64 },
    /// Great circle through `e1` and `e2`, traversed `q` times.
    GreatCircle { q: i64 },
    /// One-parameter subgroup rotating the first coordinate plane (SO(n)) or
    /// the phase of the first coordinate (U(n)), traversed `q` times.
    Subgroup { q: i64 },
}

/// Closed geodesic `s -> exp(base, s * direction)`, `s` in `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedGeodesicSpec {
    pub manifold: ManifoldSpec,
    pub base: ManifoldPoint,
    /// Unit speed.
    pub direction: TangentVector,
    pub length: f64,
    pub descriptor: GeodesicDescriptor,
    /// Locally length-minimizing among nearby closed curves.
    pub is_local_min_length: bool,
}

fn nonzero(q: i64) -> Result<()> {
    if q == 0 {
        return input("a closed geodesic needs a nonzero winding");
    }
    Ok(())
}

impl ClosedGeodesicSpec {
    pub fn from_descriptor(m: ManifoldSpec, d: GeodesicDescriptor) -> Result<Self> {
        m.validate()?;
        let base = ManifoldPoint::base(m);
        let (dir, length, local_min) = match (m, d) {
            (ManifoldSpec::Circle, GeodesicDescriptor::Loops { q }) => {
                nonzero(q)?;
                (DMatrix::from_column_slice(2, 1, &[0.0, q.signum() as f64]), 2.0 * PI * q.abs() as f64, true)
            }
            (ManifoldSpec::FlatTorus(r1, r2), GeodesicDescriptor::TorusWinding { p, q }) => {
                if p == 0 && q == 0 {
                    return input("torus winding (0, 0) is contractible");
                }
                let (a, b) = (r1 * p as f64, r2 * q as f64);
                let len = 2.0 * PI * a.hypot(b);
                let n = a.hypot(b);
                (DMatrix::from_column_slice(4, 1, &[0.0, a / n, 0.0, b / n]), len, true)
            }
            (ManifoldSpec::Sphere(n), GeodesicDescriptor::GreatCircle { q }) => {
                nonzero(q)?;
                let mut v = DMatrix::zeros(n + 1, 1);
                v[1] = q.signum() as f64;
                // a great circle is a critical point of length, but not a local minimum when n >= 2
                (v, 2.0 * PI * q.abs() as f64, n == 1)
            }
            (ManifoldSpec::SpecialOrthogonal(n), GeodesicDescriptor::Subgroup { q }) => {
                nonzero(q)?;
                let mut v = DMatrix::zeros(n, n);
                let s = q.signum() as f64 / 2f64.sqrt();
                v[(1, 0)] = s;
                v[(0, 1)] = -s;
                (v, 2.0 * PI * 2f64.sqrt() * q.abs() as f64, n == 2)
            }
            (ManifoldSpec::UnitaryRealified(n), GeodesicDescriptor::Subgroup { q }) => {
                nonzero(q)?;
                // realification of i E_11 / sqrt(2)
                let mut v = DMatrix::zeros(2 * n, 2 * n);
                let s = q.signum() as f64 / 2f64.sqrt();
                v[(n, 0)] = s;
                v[(0, n)] = -s;
                (v, 2.0 * PI * 2f64.sqrt() * q.abs() as f64, n == 1)
            }
            _ => return input(format!("descriptor {d:?} does not apply to {m}")),
        };
        let direction = TangentVector::new(&base, dir)?;
        Ok(Self { manifold: m, base, direction, length, descriptor: d, is_local_min_length: local_min })
    }

    pub fn circle(q: i64) -> Result<Self> {
        Self::from_descriptor(ManifoldSpec::Circle, GeodesicDescriptor::Loops { q })
    }

    pub fn torus(r1: f64, r2: f64, p: i64, q: i64) -> Result<Self> {
        Self::from_descriptor(ManifoldSpec::FlatTorus(r1, r2), GeodesicDescriptor::TorusWinding { p, q })
    }

    pub fn great_circle(n: usize, q: i64) -> Result<Self> {
        Self::from_descriptor(ManifoldSpec::Sphere(n), GeodesicDescriptor::GreatCircle { q })
    }

    pub fn subgroup(m: ManifoldSpec, q: i64) -> Result<Self> {
        Self::from_descriptor(m, GeodesicDescriptor::Subgroup { q })
    }

    /// Point at arc length `s`.
    pub fn point_at(&self, s: f64) -> DMatrix<f64> {
        self.manifold.exp(&self.base.coords, &(&self.direction.coords * s))
    }
}
