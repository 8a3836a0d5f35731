//! Parameter recovery from moments and the candidate-scanning fit.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::moments::{build_moment_tensors, candidate_sigmas, sample_raw_moments, MomentSet};
use super::{Dataset, SphericalMixture};
use crate::error::{Error, Result};
use crate::power::{decompose, recover_parameters, DecomposeConfig, PowerConfig, DEFAULT_IMAG_TOL};
use crate::rng::split_seed;
use crate::whitening::{whiten, WhiteningPair};

/// Variances are clamped to this before evaluating a likelihood.
pub const VAR_FLOOR: f64 = 1e-6;
/// Density values are clamped to this before taking a logarithm.
pub const PDF_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy)]
pub struct RecoverConfig {
    pub restarts: usize,
    pub seed: u64,
    pub power: PowerConfig,
    pub rank_tol: Option<f64>,
    pub imag_tol: f64,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        Self { restarts: 10, seed: 0, power: PowerConfig::default(), rank_tol: None, imag_tol: DEFAULT_IMAG_TOL }
    }
}

/// A fitted model. `mixture` holds real parts and unclamped variances, so its
/// weights need not sum to 1 and variances may be negative.
#[derive(Debug, Clone)]
pub struct RecoveredModel {
    pub mixture: SphericalMixture,
    pub weight_sum: f64,
    /// Largest relative imaginary part over the recovered weights and means.
    pub imag_residue: f64,
    pub complex_warning: bool,
    pub negative_variance: bool,
    pub iterations: usize,
    pub candidate_index: usize,
    pub sigma_bar2: f64,
}

impl RecoveredModel {
    /// The mixture with variances clamped at [`VAR_FLOOR`].
    pub fn clamped(&self) -> SphericalMixture {
        let mut m = self.mixture.clone();
        m.variances.iter_mut().for_each(|v| *v = v.max(VAR_FLOOR));
        m
    }
}

/// Whiten, decompose and map back; then solve `m₁ = Σ cᵢ μᵢ` by least
/// squares and set `σᵢ² = cᵢ / wᵢ`.
pub fn recover_model(ms: &MomentSet, k: usize, cfg: &RecoverConfig) -> Result<RecoveredModel> {
    let n = ms.m1.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} must be between 1 and the data dimension {n}")));
    }
    let wp = WhiteningPair::from_m2(&ms.m2, k, cfg.rank_tol)?;
    let t = whiten(&ms.m3, &wp)?;
    let dec = decompose(
        &t,
        &DecomposeConfig { k, restarts: cfg.restarts, seed: cfg.seed, power: cfg.power, parallel: true },
    )?;
    let comps = recover_parameters(&dec.pairs, &wp, cfg.imag_tol)?;

    let weights: Vec<f64> = comps.iter().map(|c| c.real_weight()).collect();
    let means: Vec<DVector<f64>> = comps.iter().map(|c| c.real_mean()).collect();
    let a = DMatrix::from_fn(n, k, |i, j| means[j][i]);
    let coeffs = a
        .svd(true, true)
        .solve(&ms.m1, 1e-12)
        .map_err(|e| Error::InvalidInput(format!("variance least squares failed: {e}")))?;
    let variances: Vec<f64> = (0..k).map(|i| coeffs[i] / weights[i]).collect();
    let negative_variance = variances.iter().any(|v| !(*v > 0.0));
    let imag_residue = comps.iter().fold(0.0f64, |m, c| m.max(c.imag_residue));

    Ok(RecoveredModel {
        weight_sum: weights.iter().sum(),
        mixture: SphericalMixture::from_parts(weights, means, variances)?,
        imag_residue,
        complex_warning: comps.iter().any(|c| c.complex_warning),
        negative_variance,
        iterations: dec.traces.iter().map(|t| t.iterations).sum(),
        candidate_index: ms.candidate_index,
        sigma_bar2: ms.sigma_bar2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihood {
    pub value: f64,
    /// Points where the density fell below [`PDF_FLOOR`].
    pub floored: usize,
}

/// `Σⱼ log max(pdf(xⱼ), PDF_FLOOR)`, with variances clamped at [`VAR_FLOOR`].
pub fn log_likelihood(model: &SphericalMixture, data: &Dataset) -> Result<LogLikelihood> {
    if model.dim() != data.dim() {
        return Err(Error::Shape(format!("model dim {} vs data dim {}", model.dim(), data.dim())));
    }
    let mut clamped = model.clone();
    clamped.variances.iter_mut().for_each(|v| *v = v.max(VAR_FLOOR));
    let (value, floored) = data
        .rows()
        .map(|x| {
            let p = clamped.pdf(x);
            if p >= PDF_FLOOR {
                (p.ln(), 0)
            } else {
                (PDF_FLOOR.ln(), 1)
            }
        })
        .fold((0.0, 0), |(s, c), (v, f)| (s + v, c + f));
    Ok(LogLikelihood { value, floored })
}

#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    pub k: usize,
    pub recover: RecoverConfig,
    /// Minimum sample count; `None` means `10 n²`.
    pub min_samples: Option<usize>,
    /// Rank candidates whose recovered variances are all positive above the
    /// others, and compare likelihoods only within each group.
    pub prefer_admissible: bool,
}

impl FitConfig {
    pub fn new(k: usize, restarts: usize, seed: u64) -> Self {
        Self {
            k,
            recover: RecoverConfig { restarts, seed, ..RecoverConfig::default() },
            min_samples: None,
            prefer_admissible: true,
        }
    }
}

/// Outcome of one candidate `σ̄²`.
#[derive(Debug, Clone)]
pub struct CandidateTrace {
    pub index: usize,
    pub eigenvalue: f64,
    pub log_likelihood: Option<f64>,
    pub floored: Option<usize>,
    pub imag_residue: Option<f64>,
    pub iterations: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: RecoveredModel,
    pub log_likelihood: LogLikelihood,
    pub candidates: Vec<CandidateTrace>,
}

/// Try every covariance eigenvalue as `σ̄²` and keep the model with the
/// highest likelihood (lowest candidate index on ties). With
/// `prefer_admissible`, models whose variances are all positive come first.
pub fn fit(data: &Dataset, cfg: &FitConfig) -> Result<FitResult> {
    let n = data.dim();
    if cfg.k == 0 || cfg.k > n {
        return Err(Error::InvalidInput(format!("k = {} must be between 1 and the data dimension {n}", cfg.k)));
    }
    let need = cfg.min_samples.unwrap_or(10 * n * n).max(2);
    if data.len() < need {
        return Err(Error::TooFewSamples { need, got: data.len() });
    }
    let raw = sample_raw_moments(data)?;
    let candidates = candidate_sigmas(&raw.covariance);

    let outcomes: Vec<(CandidateTrace, Option<(RecoveredModel, LogLikelihood)>)> = candidates
        .par_iter()
        .enumerate()
        .map(|(index, (eigenvalue, v))| {
            let mut rc = cfg.recover;
            rc.seed = split_seed(cfg.recover.seed, index as u64);
            let attempt = build_moment_tensors(&raw, *eigenvalue, v, index)
                .and_then(|ms| recover_model(&ms, cfg.k, &rc))
                .and_then(|model| {
                    let ll = log_likelihood(&model.mixture, data)?;
                    if ll.value.is_nan() {
                        return Err(Error::InvalidInput("likelihood is NaN".into()));
                    }
                    Ok((model, ll))
                });
            match attempt {
                Ok((model, ll)) => (
                    CandidateTrace {
                        index,
                        eigenvalue: *eigenvalue,
                        log_likelihood: Some(ll.value),
                        floored: Some(ll.floored),
                        imag_residue: Some(model.imag_residue),
                        iterations: Some(model.iterations),
                        error: None,
                    },
                    Some((model, ll)),
                ),
                Err(e) => (
                    CandidateTrace {
                        index,
                        eigenvalue: *eigenvalue,
                        log_likelihood: None,
                        floored: None,
                        imag_residue: None,
                        iterations: None,
                        error: Some(e.to_string()),
                    },
                    None,
                ),
            }
        })
        .collect();

    let mut best: Option<(RecoveredModel, LogLikelihood)> = None;
    let mut traces = Vec::with_capacity(outcomes.len());
    for (trace, found) in outcomes {
        traces.push(trace);
        if let Some((model, ll)) = found {
            let better = |(b, bl): &(RecoveredModel, LogLikelihood)| {
                let admissible = cfg.prefer_admissible && !model.negative_variance;
                let b_admissible = cfg.prefer_admissible && !b.negative_variance;
                (admissible, ll.value) > (b_admissible, bl.value)
            };
            if best.as_ref().is_none_or(better) {
                best = Some((model, ll));
            }
        }
    }
    match best {
        Some((model, log_likelihood)) => Ok(FitResult { model, log_likelihood, candidates: traces }),
        None => Err(Error::AllCandidatesFailed(
            traces.into_iter().map(|t| (t.index, t.error.unwrap_or_default())).collect(),
        )),
    }
}
