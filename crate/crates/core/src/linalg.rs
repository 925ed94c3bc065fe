//! Orthonormal range and kernel bases.
//!
//! nalgebra's SVD can lose accuracy on exactly rank-deficient input (4x4 of
//! rank 2 reconstructs to only ~1e-3), which is the usual case here, so both
//! bases come from the symmetric eigendecomposition of a Gram matrix. The
//! spectra involved are separated by many orders of magnitude, so squaring
//! costs nothing.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

fn sorted_eigenvectors(gram: DMatrix<f64>, descending: bool, k: usize) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    if descending {
        order.reverse();
    }
    let cols: Vec<DVector<f64>> = order[..k]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    DMatrix::from_columns(&cols)
}

/// Orthonormal basis of the dominant `k`-dimensional range of `m`.
pub fn range_basis(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    sorted_eigenvectors(m * m.transpose(), true, k)
}

/// Orthonormal basis of the `k` least-amplified input directions of `m`.
pub fn kernel_basis(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    sorted_eigenvectors(m.transpose() * m, false, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank_two() -> DMatrix<f64> {
        // the annihilator that exposed the SVD problem
        DMatrix::from_row_slice(
            4,
            4,
            &[
                1.732050807568877,
                1.0,
                0.0,
                2.3729239941060944,
                -3.0,
                3.8987174742355437,
                2.3729239941060944,
                5.141335320563204,
                -7.118771982318283,
                0.0,
                1.732050807568877,
                -3.0,
                0.0,
                2.3729239941060944,
                1.0,
                3.8987174742355437,
            ],
        )
    }

    #[test]
    fn range_of_rank_deficient_matrix() {
        let m = rank_two();
        let q = range_basis(&m, 2);
        let proj = &q * q.transpose();
        assert!((&proj * &m - &m).norm() < 1e-13);
        assert!((q.transpose() * &q - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn kernel_of_rank_deficient_matrix() {
        let m = rank_two();
        let k = kernel_basis(&m, 2);
        assert!((&m * &k).norm() < 1e-13);
    }
}
