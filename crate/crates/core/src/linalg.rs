//! Small dense helpers shared by the manifold catalog and the integrators.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex<f64>>;

/// Angles closer than this to pi are treated as the cut locus.
pub const CUT_LOCUS_MARGIN: f64 = 1e-6;

pub fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

pub fn skew(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m - m.transpose()) * 0.5
}

pub fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Exponential of a real skew-symmetric matrix, with closed forms in 2 and 3 dimensions.
pub fn expm_skew(m: &DMatrix<f64>) -> DMatrix<f64> {
    match m.nrows() {
        2 => {
            let a = 0.5 * (m[(1, 0)] - m[(0, 1)]);
            let (s, c) = a.sin_cos();
            DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
        }
        3 => {
            // Rodrigues
            let w = [m[(2, 1)], m[(0, 2)], m[(1, 0)]];
            let theta = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
            let k = DMatrix::from_row_slice(3, 3, &[0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0]);
            let (a, b) = if theta < 1e-4 {
                let t2 = theta * theta;
                (1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0)
            } else {
                (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
            };
            let k2 = &k * &k;
            DMatrix::identity(3, 3) + k * a + k2 * b
        }
        _ => m.clone().exp(),
    }
}

pub fn complex_of_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex::new(x, 0.0))
}

/// Realification `X + iY -> [[X, -Y], [Y, X]]`.
pub fn realify(z: &CMatrix) -> DMatrix<f64> {
    let n = z.nrows();
    let m = z.ncols();
    let mut out = DMatrix::zeros(2 * n, 2 * m);
    for i in 0..n {
        for j in 0..m {
            let c = z[(i, j)];
            out[(i, j)] = c.re;
            out[(i + n, j + m)] = c.re;
            out[(i, j + m)] = -c.im;
            out[(i + n, j)] = c.im;
        }
    }
    out
}

/// Inverse of [`realify`] reading the left block column; the input is assumed structured.
pub fn complexify(r: &DMatrix<f64>) -> CMatrix {
    let n = r.nrows() / 2;
    let m = r.ncols() / 2;
    CMatrix::from_fn(n, m, |i, j| Complex::new(r[(i, j)], r[(i + n, j)]))
}

/// Deviation of `r` from the block form `[[A, -B], [B, A]]`.
pub fn complex_structure_residual(r: &DMatrix<f64>) -> f64 {
    let n = r.nrows() / 2;
    let m = r.ncols() / 2;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..m {
            let d1 = r[(i, j)] - r[(i + n, j + m)];
            let d2 = r[(i, j + m)] + r[(i + n, j)];
            acc += d1 * d1 + d2 * d2;
        }
    }
    acc.sqrt()
}

/// Orthogonal projection onto matrices commuting with the standard complex structure.
pub fn complex_structure_projection(r: &DMatrix<f64>) -> DMatrix<f64> {
    let n = r.nrows() / 2;
    let m = r.ncols() / 2;
    let mut out = DMatrix::zeros(2 * n, 2 * m);
    for i in 0..n {
        for j in 0..m {
            let a = 0.5 * (r[(i, j)] + r[(i + n, j + m)]);
            let b = 0.5 * (r[(i + n, j)] - r[(i, j + m)]);
            out[(i, j)] = a;
            out[(i + n, j + m)] = a;
            out[(i + n, j)] = b;
            out[(i, j + m)] = -b;
        }
    }
    out
}

/// Eigen-decomposition of a unitary matrix through its complex Schur form.
///
/// Returns `(Q, angles)` with `U = Q diag(exp(i angles)) Q*` and angles in (-pi, pi].
/// Nearly scalar matrices can stall the QR iteration at machine-epsilon
/// deflation, so failed attempts are retried with looser deflation and the
/// spectrum rotated by a generic phase.
pub fn unitary_eigen(u: &CMatrix) -> (CMatrix, Vec<f64>) {
    const ATTEMPTS: [(f64, f64, usize); 4] = [(0.0, f64::EPSILON, 200), (0.0, 1e-14, 500), (0.618_033_988_7, 1e-13, 1000), (2.1, 1e-11, 0)];
    for (phase, tol, iters) in ATTEMPTS {
        let rot = Complex::new(0.0, phase).exp();
        if let Some(schur) = nalgebra::linalg::Schur::try_new(u * rot, tol, iters) {
            let (q, t) = schur.unpack();
            let angles = (0..t.nrows()).map(|k| wrap_angle(t[(k, k)].im.atan2(t[(k, k)].re) - phase)).collect();
            return (q, angles);
        }
    }
    unreachable!("unbounded Schur iteration returned without a decomposition")
}

/// Eigen-angles of a unitary matrix, in (-pi, pi].
pub fn unitary_angles(u: &CMatrix) -> Vec<f64> {
    if u.nrows() == 1 {
        let z = u[(0, 0)];
        return vec![z.im.atan2(z.re)];
    }
    unitary_eigen(u).1
}

/// Principal logarithm of a unitary matrix; fails when an eigen-angle is within
/// [`CUT_LOCUS_MARGIN`] of pi.
pub fn unitary_log(u: &CMatrix) -> Result<CMatrix> {
    use std::f64::consts::PI;
    if u.nrows() == 1 {
        let z = u[(0, 0)];
        let a = z.im.atan2(z.re);
        if a.abs() > PI - CUT_LOCUS_MARGIN {
            return Err(Error::Domain("log undefined: eigen-angle at pi".into()));
        }
        return Ok(CMatrix::from_element(1, 1, Complex::new(0.0, a)));
    }
    let (q, angles) = unitary_eigen(u);
    if angles.iter().any(|a| a.abs() > PI - CUT_LOCUS_MARGIN) {
        return Err(Error::Domain("log undefined: eigen-angle at pi".into()));
    }
    let n = angles.len();
    let d = CMatrix::from_fn(n, n, |i, j| if i == j { Complex::new(0.0, angles[i]) } else { Complex::new(0.0, 0.0) });
    let l = &q * d * q.adjoint();
    // skew-Hermitian part
    Ok((&l - l.adjoint()) * Complex::new(0.5, 0.0))
}

/// Principal logarithm of a real orthogonal matrix with positive determinant.
pub fn orthogonal_log(q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if q.nrows() == 2 {
        let a = 0.5 * (q[(1, 0)] - q[(0, 1)]);
        let b = 0.5 * (q[(0, 0)] + q[(1, 1)]);
        let t = a.atan2(b);
        if t.abs() > std::f64::consts::PI - CUT_LOCUS_MARGIN {
            return Err(Error::Domain("log undefined: rotation by pi".into()));
        }
        return Ok(DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]));
    }
    let l = unitary_log(&complex_of_real(q))?;
    Ok(skew(&l.map(|c| c.re)))
}

/// Squared Frobenius norm of the principal log of an orthogonal matrix, defined
/// everywhere (eigenvalue -1 contributes pi squared).
pub fn orthogonal_log_norm2(q: &DMatrix<f64>) -> f64 {
    if q.nrows() == 2 {
        let a = 0.5 * (q[(1, 0)] - q[(0, 1)]);
        let b = 0.5 * (q[(0, 0)] + q[(1, 1)]);
        let t = a.atan2(b);
        return 2.0 * t * t;
    }
    let angles = unitary_angles(&complex_of_real(q));
    angles.iter().map(|a| a * a).sum()
}
