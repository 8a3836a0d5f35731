//! Spherical Gaussian mixtures whose weights may be negative.

mod envelope;
mod fit;
mod moments;
mod sampler;

pub use envelope::{alpha_max_spherical, gauss_envelope, GaussPairEnvelope};
pub use fit::{
    fit, log_likelihood, recover_model, CandidateTrace, FitConfig, FitResult, LogLikelihood, RecoverConfig,
    RecoveredModel, PDF_FLOOR, VAR_FLOOR,
};
pub use moments::{
    analytic_moment_tensors, build_moment_tensors, candidate_sigmas, sample_raw_moments, AnalyticMoments, MomentSet,
    RawMoments,
};
pub use sampler::{rejection_sample, sample_mixture, Dataset, SampleOutput, ACCEPTANCE_WINDOW};

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Σ wᵢ N(μᵢ, σᵢ² I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalMixture {
    pub weights: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    /// `σᵢ²`.
    pub variances: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MixtureJson {
    k: usize,
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<f64>,
}

impl SphericalMixture {
    /// Validating constructor: weights sum to 1 (to `1e-10`), are nonzero,
    /// and variances are positive.
    pub fn new(weights: Vec<f64>, means: Vec<DVector<f64>>, variances: Vec<f64>) -> Result<Self> {
        let m = Self::from_parts(weights, means, variances)?;
        let total: f64 = m.weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("weights sum to {total}, expected 1")));
        }
        if m.weights.iter().any(|&w| w == 0.0 || !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite and nonzero".into()));
        }
        if m.variances.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput("variances must be positive".into()));
        }
        Ok(m)
    }

    /// Shape checks only. Used for fitted models whose weights need not sum
    /// to 1 and whose variances may come out negative.
    pub fn from_parts(weights: Vec<f64>, means: Vec<DVector<f64>>, variances: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || means.len() != k || variances.len() != k {
            return Err(Error::Shape(format!(
                "{} weights, {} means, {} variances",
                weights.len(),
                means.len(),
                variances.len()
            )));
        }
        let n = means[0].len();
        if n == 0 || means.iter().any(|m| m.len() != n) {
            return Err(Error::Shape("means must share a positive dimension".into()));
        }
        Ok(Self { weights, means, variances })
    }

    /// `1.5 N((11.4, −3.4), 8I) − 0.5 N((11.9, −1.9), 4I)`.
    pub fn running_example() -> Self {
        Self::new(
            vec![1.5, -0.5],
            vec![DVector::from_vec(vec![11.4, -3.4]), DVector::from_vec(vec![11.9, -1.9])],
            vec![8.0, 4.0],
        )
        .expect("running example is valid")
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn mean(&self) -> DVector<f64> {
        self.weights.iter().zip(&self.means).fold(DVector::zeros(self.dim()), |acc, (w, m)| acc + m * *w)
    }

    /// `σ̄² = Σ wᵢσᵢ²`.
    pub fn average_variance(&self) -> f64 {
        self.weights.iter().zip(&self.variances).map(|(w, v)| w * v).sum()
    }

    pub fn has_negative_weight(&self) -> bool {
        self.weights.iter().any(|&w| w < 0.0)
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        let n = self.dim() as f64;
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.variances)
            .map(|((w, mu), var)| {
                let d2: f64 = mu.iter().zip(x).map(|(m, xi)| (xi - m) * (xi - m)).sum();
                w * (2.0 * PI * var).powf(-n / 2.0) * (-d2 / (2.0 * var)).exp()
            })
            .sum()
    }

    /// The positive and negative parts as normalized mixtures, with total
    /// masses `A = Σ_{w>0} w` and `B = −Σ_{w<0} w`. `None` for an empty part.
    pub fn split_signs(&self) -> ((Self, f64), Option<(Self, f64)>) {
        let part = |keep: fn(f64) -> bool| {
            let idx: Vec<usize> = (0..self.k()).filter(|&i| keep(self.weights[i])).collect();
            if idx.is_empty() {
                return None;
            }
            let mass: f64 = idx.iter().map(|&i| self.weights[i].abs()).sum();
            let m = Self {
                weights: idx.iter().map(|&i| self.weights[i].abs() / mass).collect(),
                means: idx.iter().map(|&i| self.means[i].clone()).collect(),
                variances: idx.iter().map(|&i| self.variances[i]).collect(),
            };
            Some((m, mass))
        };
        let pos = part(|w| w > 0.0).expect("weights summing to 1 have a positive part");
        (pos, part(|w| w < 0.0))
    }

    /// Smallest density value found on a grid (`n ≤ 2`) or on random probes
    /// around the components (`n > 2`), together with its location.
    pub fn density_check(&self, resolution: usize, seed: u64) -> (f64, Vec<f64>) {
        let spread = self.variances.iter().fold(0.0f64, |a, v| a.max(v.abs())).sqrt();
        let lo: Vec<f64> = (0..self.dim())
            .map(|j| self.means.iter().map(|m| m[j]).fold(f64::INFINITY, f64::min) - 6.0 * spread)
            .collect();
        let hi: Vec<f64> = (0..self.dim())
            .map(|j| self.means.iter().map(|m| m[j]).fold(f64::NEG_INFINITY, f64::max) + 6.0 * spread)
            .collect();
        let mut best = (f64::INFINITY, Vec::new());
        let mut probe = |x: Vec<f64>| {
            let v = self.pdf(&x);
            if v < best.0 {
                best = (v, x);
            }
        };
        let steps = resolution.max(2);
        let coord = |j: usize, s: usize| lo[j] + (hi[j] - lo[j]) * s as f64 / (steps - 1) as f64;
        match self.dim() {
            1 => (0..steps).for_each(|a| probe(vec![coord(0, a)])),
            2 => (0..steps).for_each(|a| (0..steps).for_each(|b| probe(vec![coord(0, a), coord(1, b)]))),
            n => {
                let mut rng = crate::rng::rng_for(seed, 0);
                for _ in 0..steps * steps {
                    probe((0..n).map(|j| rng.random_range(lo[j]..=hi[j])).collect());
                }
            }
        }
        best
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: MixtureJson = serde_json::from_str(s)?;
        if raw.k != raw.weights.len() {
            return Err(Error::Shape(format!("k = {} but {} weights", raw.k, raw.weights.len())));
        }
        Self::new(raw.weights, raw.means.into_iter().map(DVector::from_vec).collect(), raw.variances)
    }

    /// Like [`from_json`](Self::from_json) without the sum and sign checks.
    pub fn from_json_unchecked(s: &str) -> Result<Self> {
        let raw: MixtureJson = serde_json::from_str(s)?;
        Self::from_parts(raw.weights, raw.means.into_iter().map(DVector::from_vec).collect(), raw.variances)
    }

    pub fn to_json(&self) -> Result<String> {
        let raw = MixtureJson {
            k: self.k(),
            weights: self.weights.clone(),
            means: self.means.iter().map(|m| m.iter().copied().collect()).collect(),
            variances: self.variances.clone(),
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }
}

/// A random valid mixture with `k` components in `n` dimensions. At least one
/// weight is negative when `k ≥ 2`.
///
/// Each negative component is paired with a wider positive one and given mass
/// `b ≤ a(1 − 1/α_max)`, which keeps `a N_f − b N_g` nonnegative everywhere.
pub fn random_valid_mixture<R: Rng + ?Sized>(rng: &mut R, k: usize, n: usize) -> SphericalMixture {
    assert!(k >= 1 && n >= 1);
    let n_neg = if k >= 2 { rng.random_range(1..=k / 2) } else { 0 };
    let n_pos = k - n_neg;
    let mut weights = Vec::with_capacity(k);
    let mut means = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    let random_point = |rng: &mut R, scale: f64| DVector::from_fn(n, |_, _| rng.random_range(-scale..scale));

    for i in 0..n_pos {
        let mu = random_point(rng, 5.0);
        let var: f64 = rng.random_range(1.0..4.0);
        let a = rng.random_range(0.5..1.5);
        weights.push(a);
        means.push(mu.clone());
        variances.push(var);
        if i < n_neg {
            let gvar = var * rng.random_range(0.3..0.8);
            let gmu = &mu + random_point(rng, 0.5 * var.sqrt());
            let amax = alpha_max_spherical(&mu, var, &gmu, gvar).ok().flatten().expect("narrower component");
            let b = a * (1.0 - 1.0 / amax) * rng.random_range(0.3..0.9);
            weights.push(-b);
            means.push(gmu);
            variances.push(gvar);
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    SphericalMixture::from_parts(weights, means, variances).expect("consistent shapes")
}
