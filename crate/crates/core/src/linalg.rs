//! Thin helpers over `nalgebra` for the real symmetric and general
//! eigenproblems the pipeline needs.

use nalgebra::{DMatrix, DVector};

/// `(M + Mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// All eigenpairs of a real symmetric matrix, sorted by ascending eigenvalue.
/// Ties keep the solver's column order. Eigenvectors are unit-norm columns.
pub fn sym_eigen_ascending(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = symmetrize(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Largest eigenvalue modulus of a general real square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.complex_eigenvalues().iter().fold(0.0, |r, z| r.max(z.norm()))
}

/// Spectral (operator 2-) norm of a real symmetric matrix.
pub fn sym_spectral_norm(m: &DMatrix<f64>) -> f64 {
    symmetrize(m).symmetric_eigen().eigenvalues.iter().fold(0.0, |r, x| r.max(x.abs()))
}

pub fn outer(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    a * b.transpose()
}
