//! Reproducible experiments on the running two-component example.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{analytic_moment_tensors, fit, sample_mixture, FitConfig, SphericalMixture};
use crate::power::{deflate, power_step, recover_parameters, EigenPair, DEFAULT_IMAG_TOL};
use crate::rng::{complex_gaussian, rng_for, split_seed};
use crate::tensor::{principal_sqrt, pseudo_dot, ComplexVector, SymTensor3};
use crate::whitening::{whiten, WhiteningPair};

/// Dataset sizes used by the learning experiment by default.
pub const DEFAULT_SIZES: [usize; 4] = [1_000, 10_000, 100_000, 400_000];

/// `min over permutations π of √(Σᵢ (ŵ_π(i) − wᵢ)² + Σᵢ ‖μ̂_π(i) − μᵢ‖²)`.
pub fn parameter_error(estimate: &SphericalMixture, truth: &SphericalMixture) -> Result<f64> {
    if estimate.k() != truth.k() || estimate.dim() != truth.dim() {
        return Err(Error::Shape(format!(
            "estimate has k = {}, n = {}; truth has k = {}, n = {}",
            estimate.k(),
            estimate.dim(),
            truth.k(),
            truth.dim()
        )));
    }
    let k = truth.k();
    let cost = |i: usize, j: usize| {
        (estimate.weights[j] - truth.weights[i]).powi(2) + (&estimate.means[j] - &truth.means[i]).norm_squared()
    };
    let mut best = f64::INFINITY;
    let mut perm: Vec<usize> = (0..k).collect();
    permutations(&mut perm, 0, &mut |p| {
        let total: f64 = p.iter().enumerate().map(|(i, &j)| cost(i, j)).sum();
        best = best.min(total);
    });
    Ok(best.sqrt())
}

fn permutations(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permutations(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// Whitened third moment and whitening pair of a model's exact moments.
pub fn exact_whitened(model: &SphericalMixture) -> Result<(SymTensor3, WhiteningPair)> {
    let a = analytic_moment_tensors(model);
    let wp = WhiteningPair::from_m2(&a.m2, model.k(), None)?;
    let t = whiten(&a.m3, &wp)?;
    Ok((t, wp))
}

/// A pseudo-normalized complex Gaussian start. Redraws while `θᵀθ` vanishes.
pub fn random_start(seed: u64, stream: u64, dim: usize) -> ComplexVector {
    for attempt in 0.. {
        let mut rng = rng_for(split_seed(seed, stream), attempt);
        let g = complex_gaussian(&mut rng, dim);
        let pn = pseudo_dot(&g, &g);
        if pn.norm() > 1e-12 {
            return g.map(|x| x / principal_sqrt(pn));
        }
    }
    unreachable!()
}

/// Parameter error after exactly `t` power steps per component, for
/// `t = 1..=iterations`, from one pair of starting points per component.
/// `None` marks a degenerate normalizer.
fn error_curve(
    t3: &SymTensor3,
    wp: &WhiteningPair,
    truth: &SphericalMixture,
    starts: &[ComplexVector],
    iterations: usize,
) -> Vec<Option<f64>> {
    let threshold = crate::power::DEFAULT_DEGENERATE_FACTOR * t3.fro_norm().powi(2);
    (1..=iterations)
        .map(|t| {
            let mut residual = t3.clone();
            let mut pairs = Vec::with_capacity(starts.len());
            for theta0 in starts {
                let mut theta = theta0.clone();
                for _ in 0..t {
                    theta = power_step(&residual, &theta, threshold).ok()?.0;
                }
                let pair = EigenPair { z: residual.eval3(&theta).ok()?, nu: theta };
                residual = deflate(&residual, &pair).ok()?;
                pairs.push(pair);
            }
            let comps = recover_parameters(&pairs, wp, DEFAULT_IMAG_TOL).ok()?;
            let est = SphericalMixture::from_parts(
                comps.iter().map(|c| c.real_weight()).collect(),
                comps.iter().map(|c| c.real_mean()).collect(),
                truth.variances.clone(),
            )
            .ok()?;
            parameter_error(&est, truth).ok()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub iteration: usize,
    pub mean_error: f64,
    pub median_error: f64,
    pub max_error: f64,
    /// Fraction of runs with error below `1e-8`.
    pub success_rate: f64,
    pub degenerate: usize,
}

/// Error against iteration count on the exact whitened tensor of the running
/// example, over `runs` random initializations.
pub fn convergence_experiment(runs: usize, iterations: usize, seed: u64) -> Result<Vec<ConvergenceRow>> {
    let truth = SphericalMixture::running_example();
    let (t3, wp) = exact_whitened(&truth)?;
    let curves: Vec<Vec<Option<f64>>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let starts: Vec<ComplexVector> =
                (0..truth.k()).map(|c| random_start(split_seed(seed, r as u64), c as u64, t3.dim())).collect();
            error_curve(&t3, &wp, &truth, &starts, iterations)
        })
        .collect();
    Ok((0..iterations)
        .map(|t| {
            let mut errs: Vec<f64> = curves.iter().filter_map(|c| c[t]).collect();
            let degenerate = runs - errs.len();
            errs.sort_by(f64::total_cmp);
            let mean_error = errs.iter().sum::<f64>() / errs.len().max(1) as f64;
            ConvergenceRow {
                iteration: t + 1,
                mean_error,
                median_error: median_sorted(&errs),
                max_error: errs.last().copied().unwrap_or(f64::NAN),
                success_rate: errs.iter().filter(|&&e| e < 1e-8).count() as f64 / runs.max(1) as f64,
                degenerate,
            }
        })
        .collect())
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "mean_error", "median_error", "max_error", "success_rate", "degenerate"])?;
    for r in rows {
        w.write_record([
            r.iteration.to_string(),
            r.mean_error.to_string(),
            r.median_error.to_string(),
            r.max_error.to_string(),
            r.success_rate.to_string(),
            r.degenerate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One fitted dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningRun {
    pub size: usize,
    pub dataset: usize,
    /// `+∞` when fitting failed.
    pub error: f64,
    /// The selected model carried complex residues; only real parts enter `error`.
    pub pathological: bool,
    /// Some candidate's decomposition carried complex residues.
    pub complex_candidate: bool,
    pub failed: bool,
    pub candidate_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningRow {
    pub size: usize,
    pub median_error: f64,
    pub mean_error: f64,
    /// Runs whose selected model carried complex residues.
    pub pathological: usize,
    /// Runs where some candidate's decomposition carried complex residues.
    pub complex_candidates: usize,
    pub failed: usize,
    pub datasets: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct LearningConfig {
    pub datasets: usize,
    pub restarts: usize,
    pub seed: u64,
}

/// Fit `datasets` samples of each size drawn from the running example and
/// summarize the parameter error per size.
pub fn learning_experiment(sizes: &[usize], cfg: &LearningConfig) -> Result<(Vec<LearningRow>, Vec<LearningRun>)> {
    let truth = SphericalMixture::running_example();
    let jobs: Vec<(usize, usize)> = sizes.iter().flat_map(|&s| (0..cfg.datasets).map(move |d| (s, d))).collect();
    let runs: Vec<LearningRun> = jobs
        .par_iter()
        .map(|&(size, dataset)| -> Result<LearningRun> {
            let stream = split_seed(size as u64, dataset as u64);
            let data = sample_mixture(&truth, size, split_seed(cfg.seed, stream))?.data;
            let fit_cfg = FitConfig::new(truth.k(), cfg.restarts, split_seed(cfg.seed ^ 0x5eed, stream));
            Ok(match fit(&data, &fit_cfg) {
                Ok(res) => LearningRun {
                    size,
                    dataset,
                    error: parameter_error(&res.model.mixture, &truth)?,
                    pathological: res.model.complex_warning,
                    complex_candidate: res
                        .candidates
                        .iter()
                        .any(|c| c.imag_residue.is_some_and(|r| r > fit_cfg.recover.imag_tol)),
                    failed: false,
                    candidate_index: Some(res.model.candidate_index),
                },
                Err(_) => LearningRun {
                    size,
                    dataset,
                    error: f64::INFINITY,
                    pathological: false,
                    complex_candidate: false,
                    failed: true,
                    candidate_index: None,
                },
            })
        })
        .collect::<Result<_>>()?;
    let rows = sizes
        .iter()
        .map(|&size| {
            let mine: Vec<&LearningRun> = runs.iter().filter(|r| r.size == size).collect();
            let mut errs: Vec<f64> = mine.iter().map(|r| r.error).collect();
            errs.sort_by(f64::total_cmp);
            LearningRow {
                size,
                median_error: median_sorted(&errs),
                mean_error: errs.iter().sum::<f64>() / errs.len().max(1) as f64,
                pathological: mine.iter().filter(|r| r.pathological).count(),
                complex_candidates: mine.iter().filter(|r| r.complex_candidate).count(),
                failed: mine.iter().filter(|r| r.failed).count(),
                datasets: mine.len(),
            }
        })
        .collect();
    Ok((rows, runs))
}

pub fn write_learning_csv<W: Write>(rows: &[LearningRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["size", "median_error", "mean_error", "pathological", "complex_candidates", "failed", "datasets"])?;
    for r in rows {
        w.write_record([
            r.size.to_string(),
            r.median_error.to_string(),
            r.mean_error.to_string(),
            r.pathological.to_string(),
            r.complex_candidates.to_string(),
            r.failed.to_string(),
            r.datasets.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn median_sorted(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => xs[n / 2],
        n => 0.5 * (xs[n / 2 - 1] + xs[n / 2]),
    }
}
