use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::manifolds::ManifoldSpec;

/// Cutoff `f` that switches geodesic coupling off before the injectivity radius.
///
/// `f(s) = 1` below `(R - eps)^2`, `0` from `R^2` on, and in between the
/// quintic smoothstep `h(u) = 1 - (10u^3 - 15u^4 + 6u^5)` of the normalized
/// position `u` in the band. `h` has vanishing first and second derivatives
/// at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingProfile {
    pub radius: f64,
    pub epsilon: f64,
}

impl SmoothingProfile {
    pub fn new(radius: f64, epsilon: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return input("smoothing radius must be positive");
        }
        if !(epsilon > 0.0 && epsilon < radius) {
            return input(format!("smoothing epsilon must lie in (0, {radius}), got {epsilon}"));
        }
        Ok(Self { radius, epsilon })
    }

    /// `R` = injectivity radius, `eps = 0.1 R`.
    pub fn for_manifold(m: &ManifoldSpec) -> Self {
        let r = m.injectivity_radius();
        Self { radius: r, epsilon: 0.1 * r }
    }

    pub fn band(&self) -> (f64, f64) {
        let a = self.radius - self.epsilon;
        (a * a, self.radius * self.radius)
    }

    /// `R - eps`, the largest distance on which the flow is unsmoothed.
    pub fn plain_radius(&self) -> f64 {
        self.radius - self.epsilon
    }

    pub fn f(&self, s: f64) -> f64 {
        let (a, b) = self.band();
        if s < a {
            1.0
        } else if s >= b {
            0.0
        } else {
            let u = (s - a) / (b - a);
            1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
        }
    }

    /// `int_0^s f`.
    pub fn integral(&self, s: f64) -> f64 {
        let (a, b) = self.band();
        if s < a {
            s
        } else {
            let u = ((s - a) / (b - a)).min(1.0);
            let u4 = u * u * u * u;
            a + (b - a) * (u - 2.5 * u4 + 3.0 * u4 * u - u4 * u * u)
        }
    }
}
