//! Whitening of a signed second-moment matrix.
//!
//! For `M₂ = Σ wᵢ μᵢμᵢᵀ` with some `wᵢ < 0`, the truncated eigendecomposition
//! `U D Uᵀ` has negative entries in `D`. Taking complex square roots of those
//! entries gives `W = U D^{-1/2}` with `Wᵀ M₂ W = I`, and the whitened third
//! moment `M₃(W, W, W)` has a pseudo-orthonormal decomposition.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{sym_spectral_norm, symmetrize};
use crate::tensor::{inv_sqrt, principal_sqrt, to_complex_matrix, Complex64, ComplexMatrix, SymTensor3};

/// Relative factor for the default rank tolerance, `1e-9 · ‖M‖₂`.
pub const DEFAULT_RANK_TOL_FACTOR: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct TruncatedEig {
    /// `d × k`, orthonormal columns.
    pub u: DMatrix<f64>,
    /// Signed eigenvalues, descending modulus.
    pub d: Vec<f64>,
}

/// The whitening matrix `W = U D^{-1/2}` and `(Wᵀ)⁺ = U D^{1/2}`.
#[derive(Debug, Clone)]
pub struct WhiteningPair {
    pub w: ComplexMatrix,
    pub wpinv: ComplexMatrix,
    pub eigvals: Vec<f64>,
}

impl WhiteningPair {
    pub fn d(&self) -> usize {
        self.w.nrows()
    }

    pub fn k(&self) -> usize {
        self.w.ncols()
    }

    /// Build from `M₂` directly: truncate to `k` and whiten.
    pub fn from_m2(m2: &DMatrix<f64>, k: usize, rank_tol: Option<f64>) -> Result<Self> {
        let eig = truncated_sym_eig(m2, k, rank_tol)?;
        build_whitening(&eig.u, &eig.d)
    }

    /// `max |(Wᵀ M W − I)_{ij}|`.
    pub fn whitening_defect(&self, m2: &DMatrix<f64>) -> f64 {
        let m = to_complex_matrix(m2);
        let g = self.w.transpose() * m * &self.w;
        let id = ComplexMatrix::identity(self.k(), self.k());
        (g - id).iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// `max |(Wpinvᵀ W − I)_{ij}|`.
    pub fn pinv_defect(&self) -> f64 {
        let g = self.wpinv.transpose() * &self.w;
        let id = ComplexMatrix::identity(self.k(), self.k());
        (g - id).iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// True when every eigenvalue kept is positive, i.e. `W` is real.
    pub fn is_real(&self) -> bool {
        self.eigvals.iter().all(|&x| x > 0.0)
    }
}

/// The `k` eigenpairs of largest modulus of a real symmetric matrix.
///
/// Ordering is descending modulus, ties broken by descending signed value and
/// then by lowest solver index. The input is symmetrized first.
pub fn truncated_sym_eig(m: &DMatrix<f64>, k: usize, rank_tol: Option<f64>) -> Result<TruncatedEig> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(Error::Shape(format!("expected a square matrix, got {}×{}", d, m.ncols())));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidInput(format!("need 1 ≤ k ≤ {d}, got k = {k}")));
    }
    let sym = symmetrize(m);
    let rank_tol = rank_tol.unwrap_or_else(|| DEFAULT_RANK_TOL_FACTOR * sym_spectral_norm(&sym));
    let eig = sym.symmetric_eigen();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        y.abs().total_cmp(&x.abs()).then(y.total_cmp(&x)).then(a.cmp(&b))
    });
    order.truncate(k);

    let smallest = eig.eigenvalues[order[k - 1]].abs();
    if smallest < rank_tol || smallest == 0.0 {
        return Err(Error::RankDeficient { k, modulus: smallest, rank_tol });
    }

    let u = DMatrix::from_fn(d, k, |r, c| eig.eigenvectors[(r, order[c])]);
    let dvals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    Ok(TruncatedEig { u, d: dvals })
}

/// `W = U diag(Dᵢ^{-1/2})`, `Wpinv = U diag(Dᵢ^{1/2})` under the principal branch.
pub fn build_whitening(u: &DMatrix<f64>, d: &[f64]) -> Result<WhiteningPair> {
    if u.ncols() != d.len() {
        return Err(Error::Shape(format!("U has {} columns but D has {} entries", u.ncols(), d.len())));
    }
    if d.contains(&0.0) {
        return Err(Error::SingularWhitening);
    }
    let uc = to_complex_matrix(u);
    let mut w = uc.clone();
    let mut wpinv = uc;
    for (j, &x) in d.iter().enumerate() {
        let z = Complex64::new(x, 0.0);
        let (s, is) = (principal_sqrt(z), inv_sqrt(z));
        for r in 0..w.nrows() {
            w[(r, j)] *= is;
            wpinv[(r, j)] *= s;
        }
    }
    Ok(WhiteningPair { w, wpinv, eigvals: d.to_vec() })
}

/// `M₃(W, W, W)`, a `k`-dimensional symmetric tensor.
pub fn whiten(m3: &SymTensor3, wp: &WhiteningPair) -> Result<SymTensor3> {
    if m3.dim() != wp.d() {
        return Err(Error::Shape(format!("M3 has dim {} but W has {} rows", m3.dim(), wp.d())));
    }
    m3.apply3(&wp.w, &wp.w, &wp.w)?.into_symmetric()
}
