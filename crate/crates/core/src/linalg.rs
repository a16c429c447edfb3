//! Small dense linear-algebra helpers on top of nalgebra.
//!
//! Ranks and kernels use a singular-value cut relative to the largest
//! singular value, which is what irrational frequencies require.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cut used for ranks, kernels and images.
pub const RANK_TOL: f64 = 1e-10;

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_slice(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn cut(s: &[f64], rel_tol: f64) -> f64 {
    s.first().copied().unwrap_or(0.0) * rel_tol
}

pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let c = cut(&s, rel_tol);
    s.iter().filter(|&&v| v > c && v > 0.0).count()
}

/// Orthonormal basis (as columns) of the kernel of `m`.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let ncols = m.ncols();
    // pad to at least square so that the thin SVD carries a full right basis
    let rows = m.nrows().max(ncols);
    let mut padded = DMatrix::zeros(rows, ncols);
    padded.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    let c = smax * rel_tol;
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= c || smax == 0.0)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(ncols, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis (as columns) of the image of `m`.
pub fn column_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    let c = smax * rel_tol;
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > c && s > 0.0)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}
