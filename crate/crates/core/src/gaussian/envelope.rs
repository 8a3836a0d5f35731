//! When does `α f − (α−1) g` stay a density?
//!
//! For Gaussians `f = N(μf, Σf)` and `g = N(μg, Σg)` the mixture is nonnegative
//! iff `Σg⁻¹ − Σf⁻¹` is positive semi-definite and `α ≤ α_max`, where
//! `α_max = (1 − √(|Σg|/|Σf|) e^{m/2})⁻¹` and `m` is the minimum of the
//! log-density ratio exponent.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::symmetrize;

#[derive(Debug, Clone)]
pub struct GaussPairEnvelope {
    /// `(Σg⁻¹ − Σf⁻¹)⁻¹`.
    pub sigma0: DMatrix<f64>,
    /// `Σ₀(Σg⁻¹μg − Σf⁻¹μf)`.
    pub mu0: DVector<f64>,
    /// `−(μf−μg)ᵀ Σf⁻¹ Σ₀ Σg⁻¹ (μf−μg)`.
    pub m: f64,
    pub alpha_max: f64,
}

/// Largest `α` for which `α N(μf, σf²I) − (α−1) N(μg, σg²I)` is a density.
/// `None` when `σf² ≤ σg²`: no `α > 1` works.
pub fn alpha_max_spherical(muf: &DVector<f64>, sigf2: f64, mug: &DVector<f64>, sigg2: f64) -> Result<Option<f64>> {
    if muf.len() != mug.len() {
        return Err(Error::Shape(format!("means of length {} and {}", muf.len(), mug.len())));
    }
    if muf == mug && sigf2 == sigg2 {
        return Err(Error::IdenticalDistributions);
    }
    if sigf2 <= sigg2 {
        return Ok(None);
    }
    let n = muf.len() as f64;
    let gap2 = (muf - mug).norm_squared();
    let ratio = (sigg2 / sigf2).powf(n / 2.0) * (-gap2 / (2.0 * (sigf2 - sigg2))).exp();
    Ok(Some(1.0 / (1.0 - ratio)))
}

/// General-covariance version of [`alpha_max_spherical`]. `Ok(None)` when
/// `Σg⁻¹ − Σf⁻¹` is not positive semi-definite.
pub fn gauss_envelope(
    muf: &DVector<f64>,
    sigmaf: &DMatrix<f64>,
    mug: &DVector<f64>,
    sigmag: &DMatrix<f64>,
) -> Result<Option<GaussPairEnvelope>> {
    let n = muf.len();
    if mug.len() != n || sigmaf.shape() != (n, n) || sigmag.shape() != (n, n) {
        return Err(Error::Shape("envelope inputs must share dimension".into()));
    }
    let inv = |s: &DMatrix<f64>| {
        symmetrize(s)
            .cholesky()
            .map(|c| c.inverse())
            .ok_or_else(|| Error::InvalidInput("covariance must be positive definite".into()))
    };
    let f_inv = inv(sigmaf)?;
    let g_inv = inv(sigmag)?;
    let diff = symmetrize(&(&g_inv - &f_inv));
    let eig = diff.clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f_inv.norm()).max(g_inv.norm());
    let tol = 1e-12 * scale;
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -tol {
        return Ok(None);
    }
    if min_eig <= tol {
        return Err(Error::DegenerateEnvelope);
    }
    let sigma0 = symmetrize(&diff.try_inverse().ok_or(Error::DegenerateEnvelope)?);
    let mu0 = &sigma0 * (&g_inv * mug - &f_inv * muf);
    let gap = muf - mug;
    let m = -(gap.transpose() * &f_inv * &sigma0 * &g_inv * &gap)[(0, 0)];
    let det_ratio = sigmag.determinant() / sigmaf.determinant();
    let alpha_max = 1.0 / (1.0 - det_ratio.sqrt() * (m / 2.0).exp());
    Ok(Some(GaussPairEnvelope { sigma0, mu0, m, alpha_max }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_vec(x.to_vec())
    }

    #[test]
    fn running_example_bound() {
        let a = alpha_max_spherical(&v(&[11.4, -3.4]), 8.0, &v(&[11.9, -1.9]), 4.0).unwrap().unwrap();
        let expected = 1.0 / (1.0 - 0.5 * (-2.5f64 / 8.0).exp());
        assert!((a - expected).abs() < 1e-14);
        assert!((a - 1.577).abs() < 0.005);
    }

    #[test]
    fn spherical_edge_cases() {
        assert_eq!(alpha_max_spherical(&v(&[0.0]), 1.0, &v(&[0.0]), 2.0).unwrap(), None);
        assert!(
            (alpha_max_spherical(&v(&[0.0, 0.0]), 2.0, &v(&[0.0, 0.0]), 1.0).unwrap().unwrap() - 2.0).abs() < 1e-15
        );
        assert!(matches!(alpha_max_spherical(&v(&[1.0]), 1.0, &v(&[1.0]), 1.0), Err(Error::IdenticalDistributions)));
    }

    #[test]
    fn envelope_examples() {
        let id = DMatrix::<f64>::identity(2, 2);
        let e = gauss_envelope(&v(&[0.0, 0.0]), &(&id * 2.0), &v(&[0.0, 0.0]), &id).unwrap().unwrap();
        assert!(e.m.abs() < 1e-15);
        assert!((e.alpha_max - 2.0).abs() < 1e-12);
        assert!(gauss_envelope(&v(&[0.0, 0.0]), &id, &v(&[0.0, 0.0]), &(&id * 2.0)).unwrap().is_none());
        let semi = DMatrix::from_diagonal(&v(&[2.0, 1.0]));
        assert!(matches!(gauss_envelope(&v(&[0.0, 0.0]), &semi, &v(&[1.0, 0.0]), &id), Err(Error::DegenerateEnvelope)));
    }

    #[test]
    fn envelope_matches_spherical_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let n = rng.random_range(1..=4);
            let muf = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
            let mug = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
            let sg = rng.random_range(0.5..2.0);
            let sf = sg * rng.random_range(1.1..3.0);
            let id = DMatrix::<f64>::identity(n, n);
            let e = gauss_envelope(&muf, &(&id * sf), &mug, &(&id * sg)).unwrap().unwrap();
            let a = alpha_max_spherical(&muf, sf, &mug, sg).unwrap().unwrap();
            assert!((e.alpha_max - a).abs() <= 1e-12 * a.max(1.0), "{} vs {a}", e.alpha_max);
        }
    }

    #[test]
    fn envelope_minimizer_is_stationary() {
        // μ₀ minimizes the exponent (x−μg)ᵀΣg⁻¹(x−μg) − (x−μf)ᵀΣf⁻¹(x−μf).
        let sf = DMatrix::from_row_slice(2, 2, &[3.0, 0.5, 0.5, 2.0]);
        let sg = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.8]);
        let muf = v(&[1.0, -1.0]);
        let mug = v(&[0.5, 0.0]);
        let e = gauss_envelope(&muf, &sf, &mug, &sg).unwrap().unwrap();
        let fi = sf.clone().try_inverse().unwrap();
        let gi = sg.clone().try_inverse().unwrap();
        let grad = &gi * (&e.mu0 - &mug) - &fi * (&e.mu0 - &muf);
        assert!(grad.norm() < 1e-12);
        let q = |x: &DVector<f64>| {
            ((x - &mug).transpose() * &gi * (x - &mug))[(0, 0)] - ((x - &muf).transpose() * &fi * (x - &muf))[(0, 0)]
        };
        assert!((q(&e.mu0) - e.m).abs() < 1e-12);
    }
}
