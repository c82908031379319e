// SPDX-License-Identifier: MIT OR Apache-2.0

//! Small fixed-size helpers and thin wrappers over the LAPACK-backed dense routines.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, Norm, Solve, UPLO};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Vec3 = [f64; 3];
pub type CVec3 = [C64; 3];
pub type Mat3 = [[f64; 3]; 3];
pub type CMat3 = [[C64; 3]; 3];

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn ccross(a: Vec3, b: CVec3) -> CVec3 {
    [b[2] * a[1] - b[1] * a[2], b[0] * a[2] - b[2] * a[0], b[1] * a[0] - b[0] * a[1]]
}

pub fn cnorm(a: &CVec3) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn cmat_vec(m: &CMat3, v: &CVec3) -> CVec3 {
    let mut out = [C64::new(0.0, 0.0); 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

pub fn cmat_mul(a: &CMat3, b: &CMat3) -> CMat3 {
    let mut out = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

pub fn to_cmat(m: &Mat3) -> CMat3 {
    let mut out = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = C64::new(m[i][j], 0.0);
        }
    }
    out
}

/// Spectral norm of a 3x3 complex matrix.
pub fn cmat_norm2(m: &CMat3) -> f64 {
    let a = Array2::from_shape_fn((3, 3), |(i, j)| m[i][j]);
    let ah = a.t().mapv(|z| z.conj()).dot(&a);
    let (w, _) = ah.eigh(UPLO::Lower).expect("3x3 hermitian eigensolve");
    w.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt()
}

/// Symmetric eigendecomposition with eigenvalues sorted descending.
pub fn eigh_desc(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let (w, v) = a.eigh(UPLO::Lower)?;
    let n = w.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[j].partial_cmp(&w[i]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&i| w[i]).collect();
    let mut vecs = Array2::zeros(v.raw_dim());
    for (c, &i) in order.iter().enumerate() {
        vecs.column_mut(c).assign(&v.column(i));
    }
    Ok((vals, vecs))
}

/// Orthonormal basis for the range of `a`, from the eigen-decomposition of `aᵀa`.
///
/// Columns with singular value below `rel_tol · σ_max` are dropped.
pub fn range_basis(a: &Array2<f64>, rel_tol: f64) -> Result<Array2<f64>> {
    if a.ncols() == 0 {
        return Ok(Array2::zeros((a.nrows(), 0)));
    }
    let gram = a.t().dot(a);
    let (w, v) = eigh_desc(&gram)?;
    let top = w.first().cloned().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > (rel_tol * rel_tol) * top && w[i] > 0.0).collect();
    let mut coeff = Array2::zeros((a.ncols(), keep.len()));
    for (c, &i) in keep.iter().enumerate() {
        let s = w[i].sqrt();
        coeff.column_mut(c).assign(&v.column(i).mapv(|x| x / s));
    }
    Ok(a.dot(&coeff))
}

/// Dense LU solve with a relative-residual report.
pub fn lu_solve(a: &Array2<C64>, b: &Array1<C64>) -> Result<(Array1<C64>, f64)> {
    let x = a.solve(b).map_err(|e| Error::Singular { detail: e.to_string(), cond: f64::INFINITY })?;
    let r = a.dot(&x) - b;
    let bn = b.norm_l2();
    let res = if bn > 0.0 { r.norm_l2() / bn } else { r.norm_l2() };
    if !res.is_finite() {
        return Err(Error::Singular { detail: "non-finite solution".into(), cond: f64::INFINITY });
    }
    Ok((x, res))
}

/// 2-norm condition number via singular values.
pub fn cond2(a: &Array2<C64>) -> Result<f64> {
    use ndarray_linalg::SVD;
    let (_, s, _) = a.svd(false, false)?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if smin > 0.0 { smax / smin } else { f64::INFINITY })
}
