//! Small dense complex linear algebra helpers built on `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigen-decomposition of a Hermitian matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns, in the same order as `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Self {
        let n = m.nrows();
        if n == 0 {
            return Self {
                values: Vec::new(),
                vectors: CMatrix::zeros(0, 0),
            };
        }
        let eig = SymmetricEigen::new(m.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Largest entrywise magnitude of `m - mᴴ`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Replaces `m` with `(m + mᴴ) / 2`.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest singular value, from the top eigenvalue of `sᴴs`.
pub fn max_singular_value(s: &CMatrix) -> f64 {
    let gram = symmetrize(&(s.adjoint() * s));
    HermitianEigen::new(&gram).max().max(0.0).sqrt()
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues below zero are
/// clamped; the caller is responsible for checking the PSD tolerance first.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = HermitianEigen::new(&symmetrize(m));
    let n = m.nrows();
    let mut scaled = eig.vectors.clone();
    for (c, &lambda) in eig.values.iter().enumerate() {
        let root = lambda.max(0.0).sqrt();
        for r in 0..n {
            scaled[(r, c)] *= root;
        }
    }
    symmetrize(&(scaled * eig.vectors.adjoint()))
}

/// `log2 det(m)` for a Hermitian positive-definite matrix, via Cholesky.
pub fn log2_det_hpd(m: CMatrix) -> Option<f64> {
    let chol = Cholesky::new(m)?;
    let l = chol.l_dirty();
    let n = l.nrows();
    Some(2.0 * (0..n).map(|i| l[(i, i)].re.log2()).sum::<f64>())
}

/// `xᴴ m x` (real part; imaginary part vanishes for Hermitian `m`).
pub fn quadratic_form(m: &CMatrix, x: &CVector) -> f64 {
    x.dotc(&(m * x)).re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigen_sorted_descending() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.2, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.9, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.5, 0.0),
            ],
        );
        let eig = HermitianEigen::new(&m);
        assert_eq!(eig.values, vec![0.9, 0.5, 0.2]);
        assert!((eig.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let eig = HermitianEigen::new(&m);
        assert!((eig.values[0] - 3.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let v = eig.vectors.column(0).into_owned();
        let mv = &m * &v;
        assert!((mv - v.scale(3.0)).norm() < 1e-13);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, 0.2), c(0.3, -0.2), c(0.5, 0.0)]);
        let r = psd_sqrt(&m);
        assert!((&r * &r - &m).norm() < 1e-14);
    }

    #[test]
    fn log_det_of_diagonal() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0, 0.0), c(8.0, 0.0)]));
        assert!((log2_det_hpd(m).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(log2_det_hpd(CMatrix::identity(3, 3)), Some(0.0));
    }

    #[test]
    fn singular_value_of_scaled_unitary() {
        let s = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.7, 0.0), c(0.0, 0.7), c(0.0, 0.0)]);
        assert!((max_singular_value(&s) - 0.7).abs() < 1e-14);
    }
}
