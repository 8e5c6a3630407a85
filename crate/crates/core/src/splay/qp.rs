use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Optimal partition of a loop of length `L` into `N` weighted segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSolution {
    pub d: Vec<f64>,
    /// `sum w_i d_i^2`.
    pub value: f64,
}

/// Minimizes `sum w_i d_i^2` subject to `sum d_i = L`.
///
/// The stationarity conditions give `d_i = (L / sum_j w_j^-1) w_i^-1`, with
/// optimal value `L^2 / sum_j w_j^-1`. Every `d_i` is positive, so the
/// dropped positivity constraints are inactive.
pub fn solve_partition_qp(weights: &[f64], length: f64) -> Result<PartitionSolution> {
    if weights.is_empty() {
        return input("at least one weight is required");
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return input(format!("weights must be positive and finite, got {w}"));
    }
    if !(length > 0.0 && length.is_finite()) {
        return input(format!("loop length must be positive, got {length}"));
    }
    let inv_sum: f64 = weights.iter().map(|w| 1.0 / w).sum();
    let scale = length / inv_sum;
    let d: Vec<f64> = weights.iter().map(|w| scale / w).collect();
    Ok(PartitionSolution { value: length * length / inv_sum, d })
}

/// `sum w_i d_i^2`.
pub fn partition_objective(weights: &[f64], d: &[f64]) -> f64 {
    weights.iter().zip(d).map(|(w, x)| w * x * x).sum()
}
