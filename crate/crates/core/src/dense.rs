//! Small dense helpers over row-major `n × n` slices.

use nalgebra::DMatrix;

pub(crate) fn to_matrix(m: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, m)
}

/// Cholesky succeeds iff the symmetric matrix is positive definite.
pub fn is_positive_definite(m: &[f64], n: usize) -> bool {
    m.iter().all(|v| v.is_finite()) && to_matrix(m, n).cholesky().is_some()
}

/// Inverse of a symmetric positive-definite matrix, `None` if it is not.
pub fn spd_inverse(m: &[f64], n: usize) -> Option<Vec<f64>> {
    let inv = to_matrix(m, n).cholesky()?.inverse();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    Some(out)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eigen_range(m: &[f64], n: usize) -> (f64, f64) {
    let e = to_matrix(m, n).symmetric_eigen();
    let lo = e.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = e.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

pub fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn quad(m: &[f64], n: usize, u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += m[i * n + j] * u[i] * v[j];
        }
    }
    acc
}

pub fn mat_vec(m: &[f64], n: usize, v: &[f64]) -> Vec<f64> {
    (0..n).map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum()).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_definiteness() {
        let m = [2.0, 1.0, 1.0, 3.0];
        let inv = spd_inverse(&m, 2).unwrap();
        assert!((inv[0] - 0.6).abs() < 1e-15 && (inv[1] + 0.2).abs() < 1e-15);
        assert!(!is_positive_definite(&[1.0, 2.0, 2.0, 1.0], 2));
        let (lo, hi) = eigen_range(&[1.0, 2.0, 2.0, 1.0], 2);
        assert!((lo + 1.0).abs() < 1e-14 && (hi - 3.0).abs() < 1e-14);
    }
}
