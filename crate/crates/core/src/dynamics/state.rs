use nalgebra::DMatrix;

use crate::error::{input, Result};
use crate::manifolds::{ManifoldPoint, ManifoldSpec, TangentVector};

/// Tolerance on the manifold constraints for states handed to the flows.
pub const STATE_TOL: f64 = 1e-8;

/// `N` agents on a common manifold, stored as ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    manifold: ManifoldSpec,
    points: Vec<DMatrix<f64>>,
}

impl SystemState {
    pub fn new(manifold: ManifoldSpec, points: Vec<DMatrix<f64>>) -> Result<Self> {
        manifold.validate()?;
        if points.is_empty() {
            return input("a state needs at least one agent");
        }
        for (i, p) in points.iter().enumerate() {
            manifold.check_shape(p)?;
            let r = manifold.constraint_residual(p);
            if r > STATE_TOL {
                return input(format!("agent {} is off {manifold} (residual {r:.3e})", i + 1));
            }
        }
        Ok(Self { manifold, points })
    }

    pub(crate) fn new_unchecked(manifold: ManifoldSpec, points: Vec<DMatrix<f64>>) -> Self {
        Self { manifold, points }
    }

    pub fn from_points(points: Vec<ManifoldPoint>) -> Result<Self> {
        let Some(first) = points.first() else {
            return input("a state needs at least one agent");
        };
        let m = first.manifold;
        if points.iter().any(|p| p.manifold != m) {
            return input("all agents must live on the same manifold");
        }
        Self::new(m, points.into_iter().map(|p| p.coords).collect())
    }

    /// All agents at the same point.
    pub fn consensus(point: &ManifoldPoint, n: usize) -> Self {
        Self { manifold: point.manifold, points: vec![point.coords.clone(); n] }
    }

    /// Agents at the given angles on the unit circle.
    pub fn circle_angles(thetas: &[f64]) -> Self {
        let points = thetas.iter().map(|&t| DMatrix::from_column_slice(2, 1, &[t.cos(), t.sin()])).collect();
        Self { manifold: ManifoldSpec::Circle, points }
    }

    pub fn manifold(&self) -> ManifoldSpec {
        self.manifold
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn coords(&self) -> &[DMatrix<f64>] {
        &self.points
    }

    /// Agent `i` (0-based).
    pub fn point(&self, i: usize) -> ManifoldPoint {
        ManifoldPoint::new_unchecked(self.manifold, self.points[i].clone())
    }

    pub fn points(&self) -> Vec<ManifoldPoint> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Angles of circle agents.
    pub fn angles(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[1].atan2(p[0])).collect()
    }

    /// Moves every agent along its own tangent vector with the exponential map.
    pub fn perturbed(&self, tangents: &[TangentVector]) -> Result<Self> {
        if tangents.len() != self.len() {
            return input("one tangent per agent expected");
        }
        let points = self
            .points
            .iter()
            .zip(tangents)
            .map(|(x, v)| {
                self.manifold.check_shape(&v.coords)?;
                Ok(self.manifold.exp(x, &v.coords))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { manifold: self.manifold, points })
    }

    /// Reorders agents: agent `i` of the result is agent `perm[i]` of `self` (0-based).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self { manifold: self.manifold, points: perm.iter().map(|&p| self.points[p].clone()).collect() }
    }

    /// Largest constraint residual over agents.
    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| self.manifold.constraint_residual(p)).fold(0.0, f64::max)
    }
}
