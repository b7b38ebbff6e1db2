//! Dense matrix norms and spectra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Largest dimension handled by a full symmetric eigensolve; larger
/// matrices fall back to power iteration.
pub const EIGEN_DIM_LIMIT: usize = 1024;
const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 5000;

/// Eigenvalues of a real symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a complex Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Spectral norm of a real symmetric matrix.
pub fn symmetric_spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if m.nrows() <= EIGEN_DIM_LIMIT {
        symmetric_eigenvalues(m)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    } else {
        power_iteration_norm(m, POWER_TOL, POWER_MAX_ITER)
    }
}

/// Spectral norm by power iteration on `m^T m`, started from a fixed
/// pseudo-random vector so results are reproducible.
pub fn power_iteration_norm(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let n = m.ncols();
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut v = DVector::from_fn(n, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    });
    v /= v.norm();
    let mut sigma = 0.0;
    for _ in 0..max_iter {
        let w = m.tr_mul(&(m * &v));
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = libm::sqrt(norm);
        v = w / norm;
        if (next - sigma).abs() <= tol * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// Spectral norm of a complex Hermitian matrix.
pub fn hermitian_spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(m)
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Largest absolute column sum.
pub fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest entrywise absolute difference.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Largest entrywise modulus of `a - b` for complex matrices.
pub fn max_abs_diff_complex(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// `max |U^H U - I|` entrywise.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let prod = u.adjoint() * u;
    let id = DMatrix::<Complex64>::identity(u.nrows(), u.ncols());
    max_abs_diff_complex(&prod, &id)
}

/// `max |m - m^H|` entrywise.
pub fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    max_abs_diff_complex(m, &m.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_iteration_agrees_with_eigensolve() {
        let n = 40;
        let m = DMatrix::from_fn(n, n, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).abs()));
        let exact = symmetric_spectral_norm(&m);
        let power = power_iteration_norm(&m, 1e-12, 20_000);
        assert!((exact - power).abs() < 1e-8 * exact, "{exact} vs {power}");
    }

    #[test]
    fn norms_of_small_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 3.0, 4.0]);
        assert_eq!(one_norm(&m), 6.0);
        assert_eq!(inf_norm(&m), 7.0);
        let sym = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!((symmetric_spectral_norm(&sym) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_spectrum() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        let ev = hermitian_eigenvalues(&m);
        assert!(ev[0].abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
        assert_eq!(hermitian_defect(&m), 0.0);
    }
}
