//! Catalog of closed embedded Riemannian manifolds.
//!
//! Every manifold is stored extrinsically: a point is a real matrix in the
//! ambient space `R^{rows x cols}` and the metric is the Frobenius inner
//! product restricted to the tangent space.
//!
//! | kind | ambient | injectivity radius |
//! |------|---------|--------------------|
//! | `Circle` | 2x1 | pi |
//! | `Sphere(n)` | (n+1)x1 | pi |
//! | `FlatTorus(r1, r2)` | 4x1 | pi min(r1, r2) |
//! | `SpecialOrthogonal(n)` | nxn | pi sqrt(2) |
//! | `UnitaryRealified(n)` | 2nx2n | pi sqrt(2) |
//!
//! The methods on [`ManifoldSpec`] work on raw coordinate matrices and are
//! what the flows call in their inner loops. The free functions
//! ([`exp_map`], [`log_map`], ...) are the checked, typed front door.

mod sampling;

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::linalg::{
    complex_structure_projection, complex_structure_residual, complexify, expm_skew, orthogonal_log,
    orthogonal_log_norm2, realify, skew, unitary_angles, unitary_log, CUT_LOCUS_MARGIN,
};

pub use sampling::{gaussian_tangent, random_point, random_point_with, random_tangent, random_tangent_with};

/// Tolerance of the on-manifold check for user supplied points.
pub const ON_MANIFOLD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ManifoldJson", into = "ManifoldJson")]
pub enum ManifoldSpec {
    Circle,
    Sphere(usize),
    FlatTorus(f64, f64),
    SpecialOrthogonal(usize),
    UnitaryRealified(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifoldJson {
    kind: String,
    #[serde(default)]
    params: Vec<f64>,
}

fn dim_param(params: &[f64], kind: &str, min: usize) -> std::result::Result<usize, String> {
    match params {
        [p] if p.fract() == 0.0 && *p >= min as f64 => Ok(*p as usize),
        _ => Err(format!("{kind} expects one integer parameter >= {min}")),
    }
}

impl TryFrom<ManifoldJson> for ManifoldSpec {
    type Error = String;

    fn try_from(j: ManifoldJson) -> std::result::Result<Self, String> {
        let spec = match j.kind.as_str() {
            "Circle" if j.params.is_empty() => ManifoldSpec::Circle,
            "Circle" => return Err("Circle takes no parameters".into()),
            "Sphere" => ManifoldSpec::Sphere(dim_param(&j.params, "Sphere", 1)?),
            "FlatTorus" => match j.params[..] {
                [r1, r2] => ManifoldSpec::FlatTorus(r1, r2),
                _ => return Err("FlatTorus expects two radii".into()),
            },
            "SpecialOrthogonal" => ManifoldSpec::SpecialOrthogonal(dim_param(&j.params, "SpecialOrthogonal", 2)?),
            "UnitaryRealified" => ManifoldSpec::UnitaryRealified(dim_param(&j.params, "UnitaryRealified", 1)?),
            other => return Err(format!("unknown manifold kind `{other}`")),
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

impl From<ManifoldSpec> for ManifoldJson {
    fn from(m: ManifoldSpec) -> Self {
        let (kind, params) = match m {
            ManifoldSpec::Circle => ("Circle", vec![]),
            ManifoldSpec::Sphere(n) => ("Sphere", vec![n as f64]),
            ManifoldSpec::FlatTorus(a, b) => ("FlatTorus", vec![a, b]),
            ManifoldSpec::SpecialOrthogonal(n) => ("SpecialOrthogonal", vec![n as f64]),
            ManifoldSpec::UnitaryRealified(n) => ("UnitaryRealified", vec![n as f64]),
        };
        ManifoldJson { kind: kind.to_string(), params }
    }
}

impl std::fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ManifoldSpec::Circle => write!(f, "Circle"),
            ManifoldSpec::Sphere(n) => write!(f, "Sphere({n})"),
            ManifoldSpec::FlatTorus(a, b) => write!(f, "FlatTorus({a}, {b})"),
            ManifoldSpec::SpecialOrthogonal(n) => write!(f, "SpecialOrthogonal({n})"),
            ManifoldSpec::UnitaryRealified(n) => write!(f, "UnitaryRealified({n})"),
        }
    }
}

impl ManifoldSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ManifoldSpec::Sphere(0) => input("Sphere dimension must be >= 1"),
            ManifoldSpec::FlatTorus(a, b) if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) => {
                input("FlatTorus radii must be positive")
            }
            ManifoldSpec::SpecialOrthogonal(n) if n < 2 => input("SpecialOrthogonal needs n >= 2"),
            ManifoldSpec::UnitaryRealified(0) => input("UnitaryRealified needs n >= 1"),
            _ => Ok(()),
        }
    }

    pub fn ambient_shape(&self) -> (usize, usize) {
        match *self {
            ManifoldSpec::Circle => (2, 1),
            ManifoldSpec::Sphere(n) => (n + 1, 1),
            ManifoldSpec::FlatTorus(..) => (4, 1),
            ManifoldSpec::SpecialOrthogonal(n) => (n, n),
            ManifoldSpec::UnitaryRealified(n) => (2 * n, 2 * n),
        }
    }

    /// Intrinsic dimension.
    pub fn dimension(&self) -> usize {
        match *self {
            ManifoldSpec::Circle => 1,
            ManifoldSpec::Sphere(n) => n,
            ManifoldSpec::FlatTorus(..) => 2,
            ManifoldSpec::SpecialOrthogonal(n) => n * (n - 1) / 2,
            ManifoldSpec::UnitaryRealified(n) => n * n,
        }
    }

    /// Global injectivity radius `R`.
    pub fn injectivity_radius(&self) -> f64 {
        match *self {
            ManifoldSpec::Circle | ManifoldSpec::Sphere(_) => PI,
            ManifoldSpec::FlatTorus(a, b) => PI * a.min(b),
            ManifoldSpec::SpecialOrthogonal(_) | ManifoldSpec::UnitaryRealified(_) => PI * 2f64.sqrt(),
        }
    }

    /// True when the acting group used by the integrator is commutative.
    pub fn is_abelian(&self) -> bool {
        matches!(
            self,
            ManifoldSpec::Circle
                | ManifoldSpec::FlatTorus(..)
                | ManifoldSpec::SpecialOrthogonal(2)
                | ManifoldSpec::UnitaryRealified(1)
        )
    }

    /// True when the manifold is multiply connected with an implemented winding invariant.
    pub fn has_winding_invariant(&self) -> bool {
        matches!(self, ManifoldSpec::Circle | ManifoldSpec::FlatTorus(..) | ManifoldSpec::UnitaryRealified(_))
    }

    /// The canonical base point: `e1`, `(r1, 0, r2, 0)` or the identity.
    pub fn base_point(&self) -> DMatrix<f64> {
        let (r, c) = self.ambient_shape();
        match *self {
            ManifoldSpec::Circle | ManifoldSpec::Sphere(_) => {
                let mut x = DMatrix::zeros(r, 1);
                x[0] = 1.0;
                x
            }
            ManifoldSpec::FlatTorus(a, b) => DMatrix::from_column_slice(4, 1, &[a, 0.0, b, 0.0]),
            _ => DMatrix::identity(r, c),
        }
    }

    pub fn check_shape(&self, m: &DMatrix<f64>) -> Result<()> {
        let shape = self.ambient_shape();
        if m.shape() != shape {
            return input(format!("expected {}x{} ambient matrix for {self}, got {}x{}", shape.0, shape.1, m.nrows(), m.ncols()));
        }
        Ok(())
    }

    /// Size of the violation of the defining constraints.
    pub fn constraint_residual(&self, x: &DMatrix<f64>) -> f64 {
        match *self {
            ManifoldSpec::Circle | ManifoldSpec::Sphere(_) => (x.norm() - 1.0).abs(),
            ManifoldSpec::FlatTorus(a, b) => {
                let n1 = x[0].hypot(x[1]);
                let n2 = x[2].hypot(x[3]);
                (n1 - a).abs() + (n2 - b).abs()
            }
            ManifoldSpec::SpecialOrthogonal(n) => {
                let gram = x.transpose() * x - DMatrix::<f64>::identity(n, n);
                gram.norm() + (x.determinant() - 1.0).abs()
            }
            ManifoldSpec::UnitaryRealified(n) => {
                let gram = x.transpose() * x - DMatrix::<f64>::identity(2 * n, 2 * n);
                gram.norm() + complex_structure_residual(x)
            }
        }
    }

    pub fn on_manifold(&self, x: &DMatrix<f64>, tol: f64) -> bool {
        x.shape() == self.ambient_shape() && self.constraint_residual(x) <= tol
    }

    /// Pulls a nearly-feasible point back onto the manifold.
    pub fn renormalize(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        match *self {
            ManifoldSpec::Circle | ManifoldSpec::Sphere(_) => x / x.norm(),
            ManifoldSpec::FlatTorus(a, b) => {
                let n1 = x[0].hypot(x[1]);
                let n2 = x[2].hypot(x[3]);
                DMatrix::from_column_slice(4, 1, &[x[0] * a / n1, x[1] * a / n1, x[2] * b / n2, x[3] * b / n2])
            }
            ManifoldSpec::SpecialOrthogonal(_) | ManifoldSpec::UnitaryRealified(_) => {
                // one Newton-Schulz polar step; keeps the complex block structure
                let n = x.nrows();
                let g = x.transpose() * x;
                x * (DMatrix::<f64>::identity(n, n) * 3.0 - g) * 0.5
            }
        }
    }

    /// Orthogonal projection of an ambient matrix onto `T_x M`.
    pub fn project(&self, x: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
        match *self {
            ManifoldSpec::Circle | ManifoldSpec::Sphere(_) => m - x * x.dot(m),
            ManifoldSpec::FlatTorus(a, b) => {
                let mut out = m.clone();
                for (k, r) in [(0usize, a), (2usize, b)] {
                    let c = (x[k] * m[k] + x[k + 1] * m[k + 1]) / (r * r);
                    out[k] -= c * x[k];
                    out[k + 1] -= c * x[k + 1];
                }
                out
            }
            ManifoldSpec::SpecialOrthogonal(_) => x * skew(&(x.transpose() * m)),
            ManifoldSpec::UnitaryRealified(_) => x * complex_structure_projection(&skew(&(x.transpose() * m))),
        }
    }

    pub fn exp(&self, x: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
        match *self {
            ManifoldSpec::Circle | ManifoldSpec::Sphere(_) => {
                let t = v.norm();
                if t == 0.0 {
                    return x.clone();
                }
                let y = x * t.cos() + v * (t.sin() / t);
                &y / y.norm()
            }
            ManifoldSpec::FlatTorus(a, b) => {
                let mut out = x.clone();
                for (k, r) in [(0usize, a), (2usize, b)] {
                    let w = (x[k] * v[k + 1] - x[k + 1] * v[k]) / (r * r);
                    let (s, c) = w.sin_cos();
                    out[k] = c * x[k] - s * x[k + 1];
                    out[k + 1] = s * x[k] + c * x[k + 1];
                }
                out
            }
            ManifoldSpec::SpecialOrthogonal(_) => x * expm_skew(&skew(&(x.transpose() * v))),
            ManifoldSpec::UnitaryRealified(1) => x * expm_skew(&skew(&(x.transpose() * v))),
            ManifoldSpec::UnitaryRealified(_) => {
                let u = complexify(x);
                let w = complexify(v);
                let omega = u.adjoint() * w;
                let omega = (&omega - omega.adjoint()) * Complex::new(0.5, 0.0);
                realify(&(u * omega.exp()))
            }
        }
    }

    /// Riemannian logarithm; fails near the cut locus.
    pub fn log(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match *self {
            ManifoldSpec::Circle | ManifoldSpec::Sphere(_) => {
                let theta = sphere_angle(x, y);
                if theta > PI - CUT_LOCUS_MARGIN {
                    return Err(Error::Domain("log undefined: points are antipodal".into()));
                }
                let u = y - x * x.dot(y);
                let s = u.norm();
                if s == 0.0 {
                    return Ok(DMatrix::zeros(x.nrows(), 1));
                }
                Ok(u * (theta / s))
            }
            ManifoldSpec::FlatTorus(..) => {
                let mut out = DMatrix::zeros(4, 1);
                for k in [0usize, 2] {
                    let d = factor_angle_gap(x, y, k);
                    if d.abs() > PI - CUT_LOCUS_MARGIN {
                        return Err(Error::Domain("log undefined: torus factor at half turn".into()));
                    }
                    out[k] = -d * x[k + 1];
                    out[k + 1] = d * x[k];
                }
                Ok(out)
            }
            ManifoldSpec::SpecialOrthogonal(_) | ManifoldSpec::UnitaryRealified(1) => {
                Ok(x * orthogonal_log(&(x.transpose() * y))?)
            }
            ManifoldSpec::UnitaryRealified(_) => {
                let u = complexify(x);
                let w = complexify(y);
                let l = unitary_log(&(u.adjoint() * w))?;
                Ok(realify(&(u * l)))
            }
        }
    }

    /// `(log_x y, log_y x)`, sharing the matrix logarithm on the groups.
    pub fn log_pair(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        match *self {
            ManifoldSpec::SpecialOrthogonal(_) | ManifoldSpec::UnitaryRealified(1) => {
                let a = orthogonal_log(&(x.transpose() * y))?;
                Ok((x * &a, -(y * a)))
            }
            ManifoldSpec::UnitaryRealified(_) => {
                let u = complexify(x);
                let w = complexify(y);
                let l = unitary_log(&(u.adjoint() * &w))?;
                Ok((realify(&(u * &l)), -realify(&(w * l))))
            }
            _ => Ok((self.log(x, y)?, self.log(y, x)?)),
        }
    }

    /// Squared geodesic distance.
    pub fn dist2(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        match *self {
            ManifoldSpec::Circle | ManifoldSpec::Sphere(_) => sphere_angle(x, y).powi(2),
            ManifoldSpec::FlatTorus(a, b) => {
                let d1 = a * factor_angle_gap(x, y, 0);
                let d2 = b * factor_angle_gap(x, y, 2);
                d1 * d1 + d2 * d2
            }
            ManifoldSpec::SpecialOrthogonal(_) | ManifoldSpec::UnitaryRealified(1) => {
                orthogonal_log_norm2(&(x.transpose() * y))
            }
            ManifoldSpec::UnitaryRealified(_) => {
                let u = complexify(x);
                let w = complexify(y);
                2.0 * unitary_angles(&(u.adjoint() * w)).iter().map(|a| a * a).sum::<f64>()
            }
        }
    }

    pub fn dist(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        self.dist2(x, y).sqrt()
    }

    pub fn chordal(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        (x - y).norm()
    }

    /// Lifts a tangent vector at `x` to a skew matrix `xi` with `xi x = v`.
    ///
    /// The integrator moves points by the left action `x -> expm(xi) x`.
    pub fn lift(&self, x: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
        match *self {
            ManifoldSpec::Circle | ManifoldSpec::Sphere(_) => v * x.transpose() - x * v.transpose(),
            ManifoldSpec::FlatTorus(a, b) => {
                let mut xi = DMatrix::zeros(4, 4);
                for (k, r) in [(0usize, a), (2usize, b)] {
                    let w = (x[k] * v[k + 1] - x[k + 1] * v[k]) / (r * r);
                    xi[(k + 1, k)] = w;
                    xi[(k, k + 1)] = -w;
                }
                xi
            }
            ManifoldSpec::SpecialOrthogonal(_) | ManifoldSpec::UnitaryRealified(_) => {
                (v * x.transpose() - x * v.transpose()) * 0.5
            }
        }
    }

    /// Left action `expm(xi) x` of a lifted algebra element.
    pub fn act(&self, xi: &DMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
        match *self {
            ManifoldSpec::FlatTorus(..) => {
                let mut out = x.clone();
                for k in [0usize, 2] {
                    let w = 0.5 * (xi[(k + 1, k)] - xi[(k, k + 1)]);
                    let (s, c) = w.sin_cos();
                    out[k] = c * x[k] - s * x[k + 1];
                    out[k + 1] = s * x[k] + c * x[k + 1];
                }
                out
            }
            _ => expm_skew(xi) * x,
        }
    }

    /// An orthonormal basis of `T_x M` under the Frobenius metric.
    pub fn tangent_basis(&self, x: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let (r, c) = self.ambient_shape();
        let mut basis: Vec<DMatrix<f64>> = Vec::with_capacity(self.dimension());
        for idx in 0..r * c {
            let mut e = DMatrix::zeros(r, c);
            e[idx] = 1.0;
            let mut v = self.project(x, &e);
            // two Gram-Schmidt passes
            for _ in 0..2 {
                for b in &basis {
                    let p = b.dot(&v);
                    v -= b * p;
                }
            }
            let n = v.norm();
            if n > 1e-8 {
                basis.push(v / n);
            }
            if basis.len() == self.dimension() {
                break;
            }
        }
        basis
    }
}

fn sphere_angle(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let chord = (x - y).norm();
    if chord < 1.0 {
        2.0 * (0.5 * chord).asin()
    } else {
        let c = x.dot(y);
        let s = (y - x * c).norm();
        s.atan2(c)
    }
}

/// Signed angle from `x` to `y` on the circle factor starting at row `k`, in (-pi, pi].
fn factor_angle_gap(x: &DMatrix<f64>, y: &DMatrix<f64>, k: usize) -> f64 {
    let cross = x[k] * y[k + 1] - x[k + 1] * y[k];
    let dot = x[k] * y[k] + x[k + 1] * y[k + 1];
    cross.atan2(dot)
}

/// A point of a catalog manifold in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    pub manifold: ManifoldSpec,
    pub coords: DMatrix<f64>,
}

impl ManifoldPoint {
    pub fn new(manifold: ManifoldSpec, coords: DMatrix<f64>) -> Result<Self> {
        manifold.validate()?;
        manifold.check_shape(&coords)?;
        let res = manifold.constraint_residual(&coords);
        if res > ON_MANIFOLD_TOL {
            return input(format!("point is off {manifold} (residual {res:.3e})"));
        }
        Ok(Self { manifold, coords })
    }

    pub(crate) fn new_unchecked(manifold: ManifoldSpec, coords: DMatrix<f64>) -> Self {
        Self { manifold, coords }
    }

    pub fn base(manifold: ManifoldSpec) -> Self {
        Self { manifold, coords: manifold.base_point() }
    }

    /// Unit circle point at angle `theta`.
    pub fn circle(theta: f64) -> Self {
        Self::new_unchecked(ManifoldSpec::Circle, DMatrix::from_column_slice(2, 1, &[theta.cos(), theta.sin()]))
    }

    /// Flat torus point at angles `(a, b)`.
    pub fn torus(r1: f64, r2: f64, a: f64, b: f64) -> Self {
        Self::new_unchecked(
            ManifoldSpec::FlatTorus(r1, r2),
            DMatrix::from_column_slice(4, 1, &[r1 * a.cos(), r1 * a.sin(), r2 * b.cos(), r2 * b.sin()]),
        )
    }

    pub fn zero_tangent(&self) -> TangentVector {
        let (r, c) = self.manifold.ambient_shape();
        TangentVector { base: self.clone(), coords: DMatrix::zeros(r, c) }
    }
}

/// A tangent vector together with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: ManifoldPoint,
    pub coords: DMatrix<f64>,
}

impl TangentVector {
    /// Builds a tangent vector, rejecting ambient matrices with a normal component.
    pub fn new(base: &ManifoldPoint, coords: DMatrix<f64>) -> Result<Self> {
        base.manifold.check_shape(&coords)?;
        let p = base.manifold.project(&base.coords, &coords);
        let scale = coords.norm().max(1.0);
        if (&p - &coords).norm() > 1e-10 * scale {
            return input("vector is not tangent at its base point");
        }
        Ok(Self { base: base.clone(), coords })
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }
}

fn same_manifold(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<()> {
    if x.manifold != y.manifold {
        return input(format!("points live on different manifolds ({} vs {})", x.manifold, y.manifold));
    }
    x.manifold.check_shape(&y.coords)
}

pub fn exp_map(x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
    same_manifold(x, &v.base)?;
    x.manifold.check_shape(&v.coords)?;
    Ok(ManifoldPoint::new_unchecked(x.manifold, x.manifold.exp(&x.coords, &v.coords)))
}

pub fn log_map(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<TangentVector> {
    same_manifold(x, y)?;
    let coords = x.manifold.log(&x.coords, &y.coords)?;
    Ok(TangentVector { base: x.clone(), coords })
}

pub fn geodesic_distance(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
    same_manifold(x, y)?;
    Ok(x.manifold.dist(&x.coords, &y.coords))
}

pub fn chordal_distance(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
    same_manifold(x, y)?;
    Ok(x.manifold.chordal(&x.coords, &y.coords))
}

pub fn project_tangent(x: &ManifoldPoint, m: &DMatrix<f64>) -> Result<TangentVector> {
    x.manifold.check_shape(m)?;
    Ok(TangentVector { base: x.clone(), coords: x.manifold.project(&x.coords, m) })
}

/// Frobenius inner product of two tangent vectors at `x`.
pub fn metric_inner(x: &ManifoldPoint, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    if u.base != *x || v.base != *x {
        return input("tangent vectors are not based at the given point");
    }
    Ok(u.coords.dot(&v.coords))
}

pub fn injectivity_radius(m: &ManifoldSpec) -> f64 {
    m.injectivity_radius()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    fn pt(m: ManifoldSpec, c: DMatrix<f64>) -> ManifoldPoint {
        ManifoldPoint::new(m, c).unwrap()
    }

    #[test]
    fn circle_quarter_rotation() {
        let x = ManifoldPoint::circle(0.0);
        let v = TangentVector::new(&x, col(&[0.0, PI / 2.0])).unwrap();
        let y = exp_map(&x, &v).unwrap();
        assert!((y.coords - col(&[0.0, 1.0])).norm() < 1e-15);
        let back = log_map(&x, &ManifoldPoint::circle(PI / 2.0)).unwrap();
        assert!((back.coords - col(&[0.0, PI / 2.0])).norm() < 1e-15);
    }

    #[test]
    fn sphere_half_great_circle_and_antipode() {
        let s2 = ManifoldSpec::Sphere(2);
        let e1 = pt(s2, col(&[1.0, 0.0, 0.0]));
        let v = TangentVector::new(&e1, col(&[0.0, PI, 0.0])).unwrap();
        let y = exp_map(&e1, &v).unwrap();
        assert!((y.coords - col(&[-1.0, 0.0, 0.0])).norm() < 1e-15);
        assert_eq!(log_map(&e1, &e1).unwrap().coords.norm(), 0.0);
        let anti = pt(s2, col(&[-1.0, 0.0, 0.0]));
        assert!(matches!(log_map(&e1, &anti), Err(Error::Domain(_))));
    }

    #[test]
    fn so2_exp_of_pi_generator() {
        let so2 = ManifoldSpec::SpecialOrthogonal(2);
        let x = ManifoldPoint::base(so2);
        let v = TangentVector::new(&x, DMatrix::from_row_slice(2, 2, &[0.0, -PI, PI, 0.0])).unwrap();
        let y = exp_map(&x, &v).unwrap();
        assert!((y.coords + DMatrix::<f64>::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn distances() {
        let s2 = ManifoldSpec::Sphere(2);
        let e1 = pt(s2, col(&[1.0, 0.0, 0.0]));
        let e2 = pt(s2, col(&[0.0, 1.0, 0.0]));
        assert!((geodesic_distance(&e1, &e2).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((chordal_distance(&e1, &e2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(chordal_distance(&e1, &e1).unwrap(), 0.0);
        let a = ManifoldPoint::circle(0.0);
        let b = ManifoldPoint::circle(PI);
        assert!((geodesic_distance(&a, &b).unwrap() - PI).abs() < 1e-15);
        let c = ManifoldPoint::circle(PI / 3.0);
        assert!((chordal_distance(&a, &c).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn torus_product_distance() {
        let a = ManifoldPoint::torus(1.0, 1.0, 0.0, 0.0);
        let b = ManifoldPoint::torus(1.0, 1.0, PI / 2.0, 0.0);
        assert!((geodesic_distance(&a, &b).unwrap() - PI / 2.0).abs() < 1e-15);
        // wrapped differences
        let c = ManifoldPoint::torus(2.0, 0.5, 2.0 * PI - 0.1, 0.2);
        let d = ManifoldPoint::torus(2.0, 0.5, 0.1, -0.2);
        let expect = ((2.0 * 0.2f64).powi(2) + (0.5 * 0.4f64).powi(2)).sqrt();
        assert!((geodesic_distance(&c, &d).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn projections() {
        let s2 = ManifoldSpec::Sphere(2);
        let e1 = pt(s2, col(&[1.0, 0.0, 0.0]));
        let p = project_tangent(&e1, &col(&[1.0, 1.0, 0.0])).unwrap();
        assert!((p.coords - col(&[0.0, 1.0, 0.0])).norm() < 1e-15);
        let so2 = ManifoldPoint::base(ManifoldSpec::SpecialOrthogonal(2));
        let p = project_tangent(&so2, &DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0])).unwrap();
        assert!((p.coords - DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn inner_products() {
        let x = ManifoldPoint::circle(0.0);
        let u = TangentVector::new(&x, col(&[0.0, 1.0])).unwrap();
        let v = TangentVector::new(&x, col(&[0.0, -1.0])).unwrap();
        assert_eq!(metric_inner(&x, &u, &u).unwrap(), 1.0);
        assert_eq!(metric_inner(&x, &u, &v).unwrap(), -1.0);
        assert_eq!(metric_inner(&x, &x.zero_tangent(), &u).unwrap(), 0.0);
        let other = ManifoldPoint::circle(0.3);
        assert!(matches!(metric_inner(&other, &u, &v), Err(Error::Input(_))));
    }

    #[test]
    fn shape_mismatch_is_input_error() {
        let x = ManifoldPoint::circle(0.0);
        let v = TangentVector { base: x.clone(), coords: col(&[0.0, 1.0, 0.0]) };
        assert!(matches!(exp_map(&x, &v), Err(Error::Input(_))));
        assert!(ManifoldPoint::new(ManifoldSpec::Circle, col(&[2.0, 0.0])).is_err());
    }

    #[test]
    fn injectivity_catalog() {
        assert_eq!(injectivity_radius(&ManifoldSpec::Sphere(2)), PI);
        assert_eq!(injectivity_radius(&ManifoldSpec::FlatTorus(1.0, 0.5)), PI / 2.0);
        assert_eq!(injectivity_radius(&ManifoldSpec::SpecialOrthogonal(3)), PI * 2f64.sqrt());
    }

    #[test]
    fn json_round_trip() {
        for m in [
            ManifoldSpec::Circle,
            ManifoldSpec::Sphere(3),
            ManifoldSpec::FlatTorus(1.0, 0.5),
            ManifoldSpec::SpecialOrthogonal(3),
            ManifoldSpec::UnitaryRealified(2),
        ] {
            let s = serde_json::to_string(&m).unwrap();
            assert_eq!(serde_json::from_str::<ManifoldSpec>(&s).unwrap(), m);
        }
        let s: ManifoldSpec = serde_json::from_str(r#"{"kind":"Sphere","params":[2]}"#).unwrap();
        assert_eq!(s, ManifoldSpec::Sphere(2));
        assert!(serde_json::from_str::<ManifoldSpec>(r#"{"kind":"Sphere","params":[0]}"#).is_err());
        assert!(serde_json::from_str::<ManifoldSpec>(r#"{"kind":"Klein","params":[]}"#).is_err());
        assert!(serde_json::from_str::<ManifoldSpec>(r#"{"kind":"Circle","params":[],"x":1}"#).is_err());
    }
}
