//! Fourth-order Runge-Kutta-Munthe-Kaas step for left group actions.
//!
//! Points move by `x -> expm(u) x` with `u` in the Lie algebra of the acting
//! group. Stage increments are corrected with the truncated inverse
//! differential of `expm`, `A - [u, A]/2 + [u, [u, A]]/12`; for commutative
//! groups the correction vanishes and the scheme is classical RK4 in angles.

use nalgebra::{ComplexField, DMatrix};

use crate::error::Result;

fn bracket<T: ComplexField + Copy>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a * b - b * a
}

fn dexpinv<T: ComplexField<RealField = f64> + Copy>(u: &DMatrix<T>, a: DMatrix<T>, abelian: bool) -> DMatrix<T> {
    if abelian {
        return a;
    }
    let ua = bracket(u, &a);
    let uua = bracket(u, &ua);
    a - ua * T::from_real(0.5) + uua * T::from_real(1.0 / 12.0)
}

/// One step of size `dt` from `points`, given the algebra field `k1` already
/// evaluated there.
pub(crate) fn rkmk4_step<T, F, A>(
    points: &[DMatrix<T>],
    k1: Vec<DMatrix<T>>,
    dt: f64,
    field: F,
    act: A,
    abelian: bool,
) -> Result<Vec<DMatrix<T>>>
where
    T: ComplexField<RealField = f64> + Copy,
    F: Fn(&[DMatrix<T>]) -> Result<Vec<DMatrix<T>>>,
    A: Fn(&DMatrix<T>, &DMatrix<T>) -> DMatrix<T>,
{
    let stage = |ks: &[DMatrix<T>], c: f64| -> (Vec<DMatrix<T>>, Vec<DMatrix<T>>) {
        let us: Vec<_> = ks.iter().map(|k| k * T::from_real(c * dt)).collect();
        let ys = us.iter().zip(points).map(|(u, x)| act(u, x)).collect();
        (us, ys)
    };
    let correct = |us: Vec<DMatrix<T>>, fs: Vec<DMatrix<T>>| -> Vec<DMatrix<T>> {
        us.iter().zip(fs).map(|(u, f)| dexpinv(u, f, abelian)).collect()
    };

    let (u2, y2) = stage(&k1, 0.5);
    let k2 = correct(u2, field(&y2)?);
    let (u3, y3) = stage(&k2, 0.5);
    let k3 = correct(u3, field(&y3)?);
    let (u4, y4) = stage(&k3, 1.0);
    let k4 = correct(u4, field(&y4)?);

    let w = T::from_real(dt / 6.0);
    let two = T::from_real(2.0);
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let u = (&k1[i] + &k2[i] * two + &k3[i] * two + &k4[i]) * w;
            act(&u, x)
        })
        .collect())
}
