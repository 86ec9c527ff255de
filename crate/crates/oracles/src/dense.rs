//! Dense nested-loop matrix helpers and a null-space eigenvector oracle.

use nalgebra::DMatrix;

pub type Mat = Vec<Vec<f64>>;

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut s = 0.0;
            for l in 0..k {
                s += a[i][l] * b[l][j];
            }
            out[i][j] = s;
        }
    }
    out
}

/// Q^t by repeated multiplication.
pub fn mat_pow(q: &Mat, t: usize) -> Mat {
    let n = q.len();
    let mut out: Mat = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..t {
        out = mat_mul(&out, q);
    }
    out
}

pub fn row_times(v: &[f64], q: &Mat) -> Vec<f64> {
    let n = q[0].len();
    (0..n).map(|j| v.iter().enumerate().map(|(i, vi)| vi * q[i][j]).sum()).collect()
}

pub fn times_col(q: &Mat, v: &[f64]) -> Vec<f64> {
    q.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Left eigenvector for the eigenvalue of largest real part, taken as the
/// null vector of (Q^T - lambda I) from an SVD, normalised to mass 1.
pub fn left_perron_via_svd(q: &Mat) -> (f64, Vec<f64>) {
    let n = q.len();
    let m = DMatrix::from_fn(n, n, |i, j| q[i][j]);
    let lambda = m
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let shifted = m.transpose() - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    let row: Vec<f64> = v_t.row(idx).iter().copied().collect();
    let total: f64 = row.iter().sum();
    (lambda, row.iter().map(|x| x / total).collect())
}

/// All eigenvalue moduli, sorted descending.
pub fn eigen_moduli(q: &Mat) -> Vec<f64> {
    let n = q.len();
    let m = DMatrix::from_fn(n, n, |i, j| q[i][j]);
    let mut out: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out
}
