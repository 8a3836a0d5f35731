//! Complex scalars, vectors, matrices and dense order-3 tensors.
//!
//! Vectors and matrices are `nalgebra` types over [`Complex64`]. Order-3
//! tensors are stored densely in row-major order, `(i * n + j) * n + k`.
//!
//! All complex square roots go through [`principal_sqrt`], which uses the
//! branch `z = r e^{iθ}`, `θ ∈ (−π, π]`, `√z = √r e^{iθ/2}`. In particular a
//! negative real `x` (with either sign of zero imaginary part) maps to
//! `i √|x|`, and `x^{-1/2} = −i |x|^{-1/2}`.

mod json;

pub use json::TensorJson;

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;
pub type ComplexVector = DVector<Complex64>;
pub type ComplexMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Principal square root with argument in `(−π/2, π/2]`.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return if z.re >= 0.0 { Complex64::new(z.re.sqrt(), 0.0) } else { Complex64::new(0.0, (-z.re).sqrt()) };
    }
    // Stable half-angle formulas; avoids cancellation in (|z| - re) / 2.
    let modulus = z.norm();
    let t = ((z.re.abs() + modulus) / 2.0).sqrt();
    if z.re >= 0.0 {
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

/// `z^{-1/2} = (principal_sqrt(z))^{-1}`.
pub fn inv_sqrt(z: Complex64) -> Complex64 {
    ONE / principal_sqrt(z)
}

/// Bilinear (non-conjugating) product `aᵀb`.
pub fn pseudo_dot(a: &ComplexVector, b: &ComplexVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn to_complex_vector(v: &DVector<f64>) -> ComplexVector {
    v.map(|x| Complex64::new(x, 0.0))
}

pub fn to_complex_matrix(m: &DMatrix<f64>) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Largest imaginary-part modulus among the entries.
pub fn max_imag<'a>(entries: impl IntoIterator<Item = &'a Complex64>) -> f64 {
    entries.into_iter().fold(0.0, |m, z| m.max(z.im.abs()))
}

/// Dense order-3 tensor with independent mode sizes. This is the general
/// output of [`SymTensor3::apply3`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    shape: [usize; 3],
    entries: Vec<Complex64>,
}

impl Tensor3 {
    pub fn zeros(shape: [usize; 3]) -> Self {
        Self { shape, entries: vec![ZERO; shape[0] * shape[1] * shape[2]] }
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape[1] + j) * self.shape[2] + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.entries[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: Complex64) {
        let o = self.offset(i, j, k);
        self.entries[o] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn fro_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Symmetrize a cubic tensor by averaging the six index permutations.
    pub fn into_symmetric(self) -> Result<SymTensor3> {
        let [a, b, c] = self.shape;
        if a != b || b != c {
            return Err(Error::Shape(format!("cannot symmetrize a {a}×{b}×{c} tensor")));
        }
        Ok(SymTensor3::from_entries_symmetrized(a, self.entries))
    }
}

/// Dense symmetric order-3 tensor over complex scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor3 {
    dim: usize,
    entries: Vec<Complex64>,
}

impl SymTensor3 {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![ZERO; dim * dim * dim] }
    }

    /// Build from a possibly asymmetric dense array by averaging over the six
    /// index permutations.
    pub fn from_entries_symmetrized(dim: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), dim * dim * dim, "entry count must be dim³");
        let at = |i: usize, j: usize, k: usize| entries[(i * dim + j) * dim + k];
        let mut out = vec![ZERO; entries.len()];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let s = at(i, j, k) + at(i, k, j) + at(j, i, k) + at(j, k, i) + at(k, i, j) + at(k, j, i);
                    out[(i * dim + j) * dim + k] = s / 6.0;
                }
            }
        }
        Self { dim, entries: out }
    }

    pub fn from_real_symmetrized(dim: usize, entries: &[f64]) -> Self {
        Self::from_entries_symmetrized(dim, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `v ⊗ v ⊗ v`.
    pub fn outer3(v: &ComplexVector) -> Self {
        let mut t = Self::zeros(v.len());
        t.add_scaled_outer3(ONE, v);
        t
    }

    /// In-place `self += z · v^{⊗3}`.
    pub fn add_scaled_outer3(&mut self, z: Complex64, v: &ComplexVector) {
        assert_eq!(v.len(), self.dim, "vector length must match tensor dim");
        let n = self.dim;
        for i in 0..n {
            let zi = z * v[i];
            for j in 0..n {
                let zij = zi * v[j];
                let row = (i * n + j) * n;
                for k in 0..n {
                    self.entries[row + k] += zij * v[k];
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.entries[(i * self.dim + j) * self.dim + k]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|e| e * z).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(Self { dim: self.dim, entries })
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!("tensor dims {} and {} differ", self.dim, other.dim)));
        }
        Ok(())
    }

    fn check_vector(&self, theta: &ComplexVector) -> Result<()> {
        if theta.len() != self.dim {
            return Err(Error::Shape(format!("vector of length {} against tensor of dim {}", theta.len(), self.dim)));
        }
        Ok(())
    }

    pub fn fro_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation from symmetry over all index permutations.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let e = self.get(i, j, k);
                    for p in
                        [self.get(i, k, j), self.get(j, i, k), self.get(j, k, i), self.get(k, i, j), self.get(k, j, i)]
                    {
                        worst = worst.max((e - p).norm());
                    }
                }
            }
        }
        worst
    }

    pub fn max_imag(&self) -> f64 {
        max_imag(&self.entries)
    }

    /// Multilinear map `T(A, B, C)_{ijk} = Σ T_{pqr} A_{pi} B_{qj} C_{rk}`.
    pub fn apply3(&self, a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Result<Tensor3> {
        let n = self.dim;
        for (name, m) in [("A", a), ("B", b), ("C", c)] {
            if m.nrows() != n {
                return Err(Error::Shape(format!("{name} has {} rows, tensor dim is {n}", m.nrows())));
            }
        }
        let (ma, mb, mc) = (a.ncols(), b.ncols(), c.ncols());

        // Contract the last mode, then the middle, then the first.
        let mut s1 = vec![ZERO; n * n * mc];
        for p in 0..n {
            for q in 0..n {
                let base = (p * n + q) * n;
                for k in 0..mc {
                    let mut acc = ZERO;
                    for r in 0..n {
                        acc += self.entries[base + r] * c[(r, k)];
                    }
                    s1[(p * n + q) * mc + k] = acc;
                }
            }
        }
        let mut s2 = vec![ZERO; n * mb * mc];
        for p in 0..n {
            for j in 0..mb {
                for k in 0..mc {
                    let mut acc = ZERO;
                    for q in 0..n {
                        acc += s1[(p * n + q) * mc + k] * b[(q, j)];
                    }
                    s2[(p * mb + j) * mc + k] = acc;
                }
            }
        }
        let mut out = Tensor3::zeros([ma, mb, mc]);
        for i in 0..ma {
            for j in 0..mb {
                for k in 0..mc {
                    let mut acc = ZERO;
                    for p in 0..n {
                        acc += s2[(p * mb + j) * mc + k] * a[(p, i)];
                    }
                    out.set(i, j, k, acc);
                }
            }
        }
        Ok(out)
    }

    /// `T(I, θ, θ)`.
    pub fn contract2(&self, theta: &ComplexVector) -> Result<ComplexVector> {
        self.check_vector(theta)?;
        let n = self.dim;
        let mut out = ComplexVector::zeros(n);
        for i in 0..n {
            let mut acc = ZERO;
            for j in 0..n {
                let row = (i * n + j) * n;
                let mut inner = ZERO;
                for k in 0..n {
                    inner += self.entries[row + k] * theta[k];
                }
                acc += inner * theta[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// `T(θ, θ, θ) = θᵀ T(I, θ, θ)`.
    pub fn eval3(&self, theta: &ComplexVector) -> Result<Complex64> {
        let v = self.contract2(theta)?;
        Ok(pseudo_dot(theta, &v))
    }
}
