use super::state::SystemState;
use crate::error::{input, Result};
use crate::manifolds::TangentVector;

/// Central-difference Riemannian gradient of `f` at `state`, one agent at a time.
///
/// For each agent and each vector `e_k` of an orthonormal tangent basis,
/// `(f(exp(h e_k)) - f(exp(-h e_k))) / 2h` is the `k`-th coordinate.
pub fn finite_difference_gradient<F>(state: &SystemState, f: F, h: f64) -> Result<Vec<TangentVector>>
where
    F: Fn(&SystemState) -> f64,
{
    if !(h > 0.0) {
        return input(format!("finite-difference step must be positive, got {h}"));
    }
    let m = state.manifold();
    let mut out = Vec::with_capacity(state.len());
    let mut pts = state.coords().to_vec();
    for i in 0..state.len() {
        let xi = state.coords()[i].clone();
        let mut g = &xi * 0.0;
        for e in m.tangent_basis(&xi) {
            pts[i] = m.exp(&xi, &(&e * h));
            let fp = f(&SystemState::new_unchecked(m, pts.clone()));
            pts[i] = m.exp(&xi, &(&e * -h));
            let fm = f(&SystemState::new_unchecked(m, pts.clone()));
            g += e * ((fp - fm) / (2.0 * h));
        }
        pts[i] = xi;
        out.push(TangentVector { base: state.point(i), coords: g });
    }
    Ok(out)
}

/// Gradient norms below this are treated as this value when forming relative errors.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

/// `|a - b| / max(|a|, RELATIVE_ERROR_FLOOR)` over the stacked agent vectors.
pub fn relative_error(a: &[TangentVector], b: &[TangentVector]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (&x.coords - &y.coords).norm_squared()).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x.coords.norm_squared()).sum::<f64>().sqrt();
    diff / na.max(RELATIVE_ERROR_FLOOR)
}
