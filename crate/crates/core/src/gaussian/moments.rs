//! Raw sample moments and the reduced moments `m₁`, `M₂`, `M₃`.
//!
//! With `σ̄² = Σ wᵢσᵢ²` an eigenvalue of the covariance and `v` a unit
//! eigenvector for it,
//!
//! ```text
//! m₁ = E[x (vᵀ(x − E[x]))²]                  = Σ wᵢσᵢ² μᵢ
//! M₂ = E[x⊗x] − σ̄² I                        = Σ wᵢ μᵢ⊗μᵢ
//! M₃ = E[x⊗x⊗x] − Σⱼ sym(m₁⊗eⱼ⊗eⱼ)          = Σ wᵢ μᵢ⊗μᵢ⊗μᵢ
//! ```
//!
//! and `σ̄²` is the `(r+1)`-th smallest covariance eigenvalue, `r` being the
//! number of negative eigenvalues of `Σ wᵢ (μᵢ−μ̄)(μᵢ−μ̄)ᵀ`.

use nalgebra::{DMatrix, DVector};

use super::{Dataset, SphericalMixture};
use crate::error::{Error, Result};
use crate::linalg::sym_eigen_ascending;
use crate::tensor::SymTensor3;

/// Moments with `1/N` normalization.
#[derive(Debug, Clone)]
pub struct RawMoments {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    /// `E[x⊗x]`.
    pub second: DMatrix<f64>,
    /// `E[x⊗x⊗x]`, row-major `n³`.
    pub third: Vec<f64>,
}

impl RawMoments {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn third_at(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dim();
        self.third[(i * n + j) * n + k]
    }
}

#[derive(Debug, Clone)]
pub struct MomentSet {
    pub m1: DVector<f64>,
    pub m2: DMatrix<f64>,
    pub m3: SymTensor3,
    pub sigma_bar2: f64,
    pub v: DVector<f64>,
    pub candidate_index: usize,
}

/// Closed-form population quantities of a mixture.
#[derive(Debug, Clone)]
pub struct AnalyticMoments {
    pub raw: RawMoments,
    pub m1: DVector<f64>,
    pub m2: DMatrix<f64>,
    pub m3: SymTensor3,
    pub sigma_bar2: f64,
    /// Negative eigenvalues of `Σ wᵢ (μᵢ−μ̄)(μᵢ−μ̄)ᵀ`.
    pub r: usize,
    pub centered: DMatrix<f64>,
}

pub fn sample_raw_moments(data: &Dataset) -> Result<RawMoments> {
    let count = data.len();
    if count < 2 {
        return Err(Error::TooFewSamples { need: 2, got: count });
    }
    let n = data.dim();
    let mut sum1 = vec![0.0; n];
    let mut sum2 = vec![0.0; n * n];
    let mut sum3 = vec![0.0; n * n * n];
    for x in data.rows() {
        for i in 0..n {
            sum1[i] += x[i];
            for j in i..n {
                let xij = x[i] * x[j];
                sum2[i * n + j] += xij;
                for k in j..n {
                    sum3[(i * n + j) * n + k] += xij * x[k];
                }
            }
        }
    }
    let inv = 1.0 / count as f64;
    let mean = DVector::from_iterator(n, sum1.iter().map(|s| s * inv));
    let second = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        sum2[a * n + b] * inv
    });
    let mut third = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut idx = [i, j, k];
                idx.sort_unstable();
                third[(i * n + j) * n + k] = sum3[(idx[0] * n + idx[1]) * n + idx[2]] * inv;
            }
        }
    }
    let covariance = &second - &mean * mean.transpose();
    Ok(RawMoments { mean, covariance, second, third })
}

/// All eigenpairs of the covariance, ascending. Each is a candidate `(σ̄², v)`.
pub fn candidate_sigmas(covariance: &DMatrix<f64>) -> Vec<(f64, DVector<f64>)> {
    let (values, vectors) = sym_eigen_ascending(covariance);
    values.into_iter().enumerate().map(|(i, x)| (x, vectors.column(i).into_owned())).collect()
}

pub fn build_moment_tensors(
    raw: &RawMoments,
    sigma_bar2: f64,
    v: &DVector<f64>,
    candidate_index: usize,
) -> Result<MomentSet> {
    let n = raw.dim();
    if v.len() != n {
        return Err(Error::Shape(format!("v has length {} but data has dim {n}", v.len())));
    }
    let xbar = &raw.mean;
    // m₁ᵢ = Σⱼₖ vⱼvₖ E[xᵢ(xⱼ − x̄ⱼ)(xₖ − x̄ₖ)], expanded over raw moments.
    let m1 = DVector::from_fn(n, |i, _| {
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                let c = raw.third_at(i, j, k) - xbar[j] * raw.second[(i, k)] - xbar[k] * raw.second[(i, j)]
                    + xbar[i] * xbar[j] * xbar[k];
                acc += v[j] * v[k] * c;
            }
        }
        acc
    });
    let m2 = &raw.second - DMatrix::identity(n, n) * sigma_bar2;
    let m3 = SymTensor3::from_real_symmetrized(n, &reduce_third(&raw.third, &m1));
    Ok(MomentSet { m1, m2, m3, sigma_bar2, v: v.clone(), candidate_index })
}

/// `E[x⊗x⊗x] − Σⱼ (m₁⊗eⱼ⊗eⱼ + eⱼ⊗m₁⊗eⱼ + eⱼ⊗eⱼ⊗m₁)`.
fn reduce_third(third: &[f64], m1: &DVector<f64>) -> Vec<f64> {
    let n = m1.len();
    let mut out = third.to_vec();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut sub = 0.0;
                if j == k {
                    sub += m1[i];
                }
                if i == k {
                    sub += m1[j];
                }
                if i == j {
                    sub += m1[k];
                }
                out[(i * n + j) * n + k] -= sub;
            }
        }
    }
    out
}

/// Raw and reduced moments of a mixture in closed form, using
/// `E[x⊗x] = Σ wᵢ(μᵢμᵢᵀ + σᵢ²I)` and
/// `E[x⊗x⊗x] = Σ wᵢ(μᵢ^{⊗3} + σᵢ² Σⱼ sym(μᵢ⊗eⱼ⊗eⱼ))`.
pub fn analytic_moment_tensors(model: &SphericalMixture) -> AnalyticMoments {
    let n = model.dim();
    let mean = model.mean();
    let sigma_bar2 = model.average_variance();
    let components = || model.weights.iter().zip(&model.means).zip(&model.variances).map(|((w, m), v)| (*w, m, *v));

    let mut m2 = DMatrix::zeros(n, n);
    let mut centered = DMatrix::zeros(n, n);
    let mut m1 = DVector::zeros(n);
    let mut third_mu = vec![0.0; n * n * n];
    for (w, mu, var) in components() {
        m2 += mu * mu.transpose() * w;
        let d = mu - &mean;
        centered += &d * d.transpose() * w;
        m1 += mu * (w * var);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    third_mu[(i * n + j) * n + k] += w * mu[i] * mu[j] * mu[k];
                }
            }
        }
    }
    let second = &m2 + DMatrix::identity(n, n) * sigma_bar2;
    let mut third = third_mu.clone();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut add = 0.0;
                if j == k {
                    add += m1[i];
                }
                if i == k {
                    add += m1[j];
                }
                if i == j {
                    add += m1[k];
                }
                third[(i * n + j) * n + k] += add;
            }
        }
    }
    let covariance = &centered + DMatrix::identity(n, n) * sigma_bar2;
    let (cvals, _) = sym_eigen_ascending(&centered);
    let scale = cvals.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let r = cvals.iter().filter(|&&x| x < -1e-9 * scale).count();
    AnalyticMoments {
        raw: RawMoments { mean, covariance, second, third },
        m1,
        m2,
        m3: SymTensor3::from_real_symmetrized(n, &third_mu),
        sigma_bar2,
        r,
        centered,
    }
}
