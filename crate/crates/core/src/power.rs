//! Tensor power method over complex scalars.
//!
//! For a tensor with a pseudo-orthonormal decomposition `T = Σ zᵢ νᵢ^{⊗3}`
//! (`νᵢᵀνⱼ = δᵢⱼ` under the bilinear form), the iteration
//!
//! ```text
//! θ_t = T(I, θ_{t−1}, θ_{t−1}) / [T(I, θ_{t−1}, θ_{t−1})ᵀ T(I, θ_{t−1}, θ_{t−1})]^{1/2}
//! λ_t = T(θ_t, θ_t, θ_t)
//! ```
//!
//! converges quadratically to `±ν₁`, `±z₁`, where component 1 maximizes
//! `|zᵢ νᵢᵀθ₀|`. Components are peeled off one at a time by deflation.
//! Because `z ν^{⊗3} = (−z)(−ν)^{⊗3}`, every comparison here is modulo sign.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{complex_gaussian, rng_for, split_seed};
use crate::tensor::{principal_sqrt, pseudo_dot, Complex64, ComplexVector, SymTensor3, ONE};
use crate::whitening::WhiteningPair;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_DEGENERATE_FACTOR: f64 = 1e-14;
pub const DEFAULT_IMAG_TOL: f64 = 1e-6;

/// Fresh starting points drawn per restart when the normalizer degenerates.
const MAX_DEGENERATE_REDRAWS: usize = 64;

/// A pseudo-eigenpair `(λ, θ)` with `θᵀθ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub z: Complex64,
    pub nu: ComplexVector,
}

impl EigenPair {
    pub fn flipped(&self) -> Self {
        Self { z: -self.z, nu: -&self.nu }
    }

    /// Representative of `{(z, ν), (−z, −ν)}` whose largest-modulus entry of
    /// `ν` has positive real part (positive imaginary part if purely imaginary).
    pub fn canonical(&self) -> Self {
        let pivot = self.nu.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(ONE);
        let negative = if pivot.re.abs() > 1e-12 * pivot.norm() { pivot.re < 0.0 } else { pivot.im < 0.0 };
        if negative {
            self.flipped()
        } else {
            self.clone()
        }
    }

    pub fn pseudo_norm(&self) -> Complex64 {
        pseudo_dot(&self.nu, &self.nu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub lambda: Complex64,
    /// `T(θ)ᵀT(θ)` before taking the square root.
    pub normalizer: Complex64,
    /// `min(‖θ_t − θ_{t−1}‖, ‖θ_t + θ_{t−1}‖)`.
    pub displacement: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct PowerConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Normalizers with modulus below `factor · ‖T‖_F²` count as degenerate.
    pub degenerate_factor: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, degenerate_factor: DEFAULT_DEGENERATE_FACTOR }
    }
}

/// Euclidean distance between `a` and `±b`, whichever is smaller.
pub fn sign_aligned_distance(a: &ComplexVector, b: &ComplexVector) -> f64 {
    (a - b).norm().min((a + b).norm())
}

/// One application of the iteration map. Returns `(θ_next, T(θ)ᵀT(θ))`.
pub fn power_step(
    t: &SymTensor3,
    theta: &ComplexVector,
    degenerate_threshold: f64,
) -> Result<(ComplexVector, Complex64)> {
    let image = t.contract2(theta)?;
    let normalizer = pseudo_dot(&image, &image);
    if !(normalizer.norm() >= degenerate_threshold) || !normalizer.is_finite() {
        return Err(Error::DegenerateNormalizer);
    }
    let root = principal_sqrt(normalizer);
    Ok((image.map(|x| x / root), normalizer))
}

/// Iterate from `theta0` until the sign-aligned displacement drops below
/// `tol` or `max_iter` steps have run. Non-convergence is reported through
/// the trace, not as an error.
pub fn power_iterate(
    t: &SymTensor3,
    theta0: &ComplexVector,
    tol: f64,
    max_iter: usize,
) -> Result<(EigenPair, IterationTrace)> {
    power_iterate_with(t, theta0, &PowerConfig { tol, max_iter, ..PowerConfig::default() })
}

pub fn power_iterate_with(
    t: &SymTensor3,
    theta0: &ComplexVector,
    cfg: &PowerConfig,
) -> Result<(EigenPair, IterationTrace)> {
    if theta0.len() != t.dim() {
        return Err(Error::Shape(format!("θ0 has length {} but T has dim {}", theta0.len(), t.dim())));
    }
    if theta0.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::InvalidInput("θ0 must be nonzero".into()));
    }
    let threshold = cfg.degenerate_factor * t.fro_norm().powi(2);
    let mut theta = theta0.clone();
    let mut trace = IterationTrace::default();
    let mut lambda = t.eval3(&theta)?;

    for _ in 0..cfg.max_iter {
        let (next, normalizer) = power_step(t, &theta, threshold)?;
        let displacement = sign_aligned_distance(&next, &theta);
        theta = next;
        lambda = t.eval3(&theta)?;
        trace.records.push(IterationRecord { lambda, normalizer, displacement });
        trace.iterations += 1;
        if displacement < cfg.tol {
            trace.converged = true;
            break;
        }
    }
    Ok((EigenPair { z: lambda, nu: theta }, trace))
}

/// `T − z ν^{⊗3}`.
pub fn deflate(t: &SymTensor3, pair: &EigenPair) -> Result<SymTensor3> {
    if pair.nu.len() != t.dim() {
        return Err(Error::Shape(format!("ν has length {} but T has dim {}", pair.nu.len(), t.dim())));
    }
    let mut out = t.clone();
    out.add_scaled_outer3(-pair.z, &pair.nu);
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct DecomposeConfig {
    pub k: usize,
    pub restarts: usize,
    pub seed: u64,
    pub power: PowerConfig,
    /// Run restarts on the rayon pool. The outcome does not depend on it.
    pub parallel: bool,
}

impl DecomposeConfig {
    pub fn new(k: usize, restarts: usize, seed: u64) -> Self {
        Self { k, restarts, seed, power: PowerConfig::default(), parallel: true }
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub pairs: Vec<EigenPair>,
    /// Trace of the kept run for each component.
    pub traces: Vec<IterationTrace>,
    /// Degenerate-normalizer redraws over the whole decomposition.
    pub degenerate_redraws: usize,
}

struct RunOutcome {
    result: Option<(EigenPair, IterationTrace)>,
    redraws: usize,
}

fn single_run(t: &SymTensor3, cfg: &DecomposeConfig, component: usize, restart: usize) -> RunOutcome {
    let stream = split_seed(component as u64, restart as u64);
    let mut redraws = 0;
    for attempt in 0..MAX_DEGENERATE_REDRAWS {
        let mut rng = rng_for(cfg.seed, split_seed(stream, attempt as u64));
        let raw = complex_gaussian(&mut rng, t.dim());
        let pn = pseudo_dot(&raw, &raw);
        if pn.norm() < 1e-300 {
            redraws += 1;
            continue;
        }
        let theta0 = raw.map(|x| x / principal_sqrt(pn));
        match power_iterate_with(t, &theta0, &cfg.power) {
            Ok(found) => return RunOutcome { result: Some(found), redraws },
            Err(Error::DegenerateNormalizer) => redraws += 1,
            Err(_) => break,
        }
    }
    RunOutcome { result: None, redraws }
}

/// Extract `k` components by power iteration and deflation.
///
/// For each component, `restarts` independent starts are run and the
/// converged run with the largest `|λ|` is kept (lowest restart index on
/// ties). Starting points are `θ₀ = g / (gᵀg)^{1/2}` with `g` complex Gaussian.
pub fn decompose(t: &SymTensor3, cfg: &DecomposeConfig) -> Result<Decomposition> {
    if cfg.k == 0 || cfg.restarts == 0 {
        return Err(Error::InvalidInput("k and restarts must be at least 1".into()));
    }
    if cfg.k > t.dim() {
        return Err(Error::InvalidInput(format!("cannot extract {} components from a dim-{} tensor", cfg.k, t.dim())));
    }
    let mut residual = t.clone();
    let mut pairs = Vec::with_capacity(cfg.k);
    let mut traces = Vec::with_capacity(cfg.k);
    let mut degenerate_redraws = 0;

    for component in 0..cfg.k {
        let outcomes: Vec<RunOutcome> = if cfg.parallel && cfg.restarts > 1 {
            (0..cfg.restarts).into_par_iter().map(|r| single_run(&residual, cfg, component, r)).collect()
        } else {
            (0..cfg.restarts).map(|r| single_run(&residual, cfg, component, r)).collect()
        };
        degenerate_redraws += outcomes.iter().map(|o| o.redraws).sum::<usize>();

        let best = outcomes.into_iter().filter_map(|o| o.result).filter(|(_, trace)| trace.converged).fold(
            None::<(EigenPair, IterationTrace)>,
            |best, cand| match best {
                Some(b) if b.0.z.norm() >= cand.0.z.norm() => Some(b),
                _ => Some(cand),
            },
        );
        let Some((pair, trace)) = best else {
            return Err(Error::NotConverged { index: component, partial: pairs });
        };
        residual = deflate(&residual, &pair)?;
        pairs.push(pair);
        traces.push(trace);
    }
    Ok(Decomposition { pairs, traces, degenerate_redraws })
}

/// Parameters `(w, μ)` mapped back from a pseudo-eigenpair.
#[derive(Debug, Clone)]
pub struct RecoveredComponent {
    pub weight: Complex64,
    pub mean: ComplexVector,
    /// `max(|Im w| / |w|, ‖Im μ‖ / ‖μ‖)`.
    pub imag_residue: f64,
    /// Set when `imag_residue` exceeds the tolerance; values stay complex.
    pub complex_warning: bool,
}

impl RecoveredComponent {
    pub fn real_weight(&self) -> f64 {
        self.weight.re
    }

    pub fn real_mean(&self) -> nalgebra::DVector<f64> {
        self.mean.map(|z| z.re)
    }
}

/// `wᵢ = 1 / zᵢ²`, `μᵢ = zᵢ · (Wᵀ)⁺ νᵢ`. Both are invariant under `(z, ν) → (−z, −ν)`.
pub fn recover_parameters(pairs: &[EigenPair], wp: &WhiteningPair, imag_tol: f64) -> Result<Vec<RecoveredComponent>> {
    pairs
        .iter()
        .map(|pair| {
            if pair.nu.len() != wp.k() {
                return Err(Error::Shape(format!("ν has length {} but W has {} columns", pair.nu.len(), wp.k())));
            }
            if pair.z.norm() == 0.0 {
                return Err(Error::ZeroEigenvalue);
            }
            let weight = ONE / (pair.z * pair.z);
            let mean = (&wp.wpinv * &pair.nu) * pair.z;
            let w_res = weight.im.abs() / weight.norm();
            let mean_norm = mean.norm();
            let mu_res = if mean_norm > 0.0 { mean.map(|z| z.im).norm() / mean_norm } else { 0.0 };
            let imag_residue = w_res.max(mu_res);
            Ok(RecoveredComponent { weight, mean, imag_residue, complex_warning: imag_residue > imag_tol })
        })
        .collect()
}

/// The constants of the convergence guarantee for a given start `θ₀` and step `t`.
#[derive(Debug, Clone)]
pub struct ConvergenceBound {
    /// `max{1, |z₁|²/|zᵢ|², |z₁|‖νᵢ‖/|zᵢ|}`.
    pub m: f64,
    /// `k M |z₂c₂ / z₁c₁|^{2^t}` with `cᵢ = νᵢᵀθ₀`.
    pub epsilon_t: f64,
    /// `7 |z₁| ε_t`.
    pub lambda_err_bound: f64,
    /// `ε_t (‖ν₁‖ + √2)`.
    pub theta_err_bound: f64,
    /// The bounds only hold when `ε_t < 1/2`.
    pub valid: bool,
    /// Component indices sorted by descending `|zᵢ νᵢᵀθ₀|`; `order[0]` is the limit.
    pub order: Vec<usize>,
    pub ratio: f64,
}

pub fn convergence_bound(
    zs: &[Complex64],
    nus: &[ComplexVector],
    theta0: &ComplexVector,
    t: u32,
) -> Result<ConvergenceBound> {
    if zs.is_empty() || zs.len() != nus.len() {
        return Err(Error::Shape(format!("{} eigenvalues for {} vectors", zs.len(), nus.len())));
    }
    let k = zs.len();
    let weights: Vec<f64> = zs.iter().zip(nus).map(|(z, nu)| (z * pseudo_dot(nu, theta0)).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));

    let lead = order[0];
    let z1 = zs[lead].norm();
    if weights[order[k - 1]] == 0.0 {
        return Err(Error::GapViolated);
    }
    let ratio = if k == 1 {
        0.0
    } else {
        if weights[order[0]] <= weights[order[1]] {
            return Err(Error::GapViolated);
        }
        weights[order[1]] / weights[order[0]]
    };
    let m = zs.iter().zip(nus).fold(1.0f64, |m, (z, nu)| {
        let zi = z.norm();
        m.max(z1 * z1 / (zi * zi)).max(z1 * nu.norm() / zi)
    });
    let epsilon_t = if k == 1 { 0.0 } else { k as f64 * m * ratio.powf(2f64.powi(t as i32)) };
    Ok(ConvergenceBound {
        m,
        epsilon_t,
        lambda_err_bound: 7.0 * z1 * epsilon_t,
        theta_err_bound: epsilon_t * (nus[lead].norm() + std::f64::consts::SQRT_2),
        valid: epsilon_t < 0.5,
        order,
        ratio,
    })
}

/// `2|z|(2^k − 1)`, an upper bound on `|(1+z)^{−k} − 1|` for `|z| < 1/2`.
pub fn sqrt_perturb_bound(z: Complex64, kexp: f64) -> Result<f64> {
    if !(kexp > 0.0) {
        return Err(Error::InvalidInput(format!("exponent must be positive, got {kexp}")));
    }
    let r = z.norm();
    if !(r < 0.5) {
        return Err(Error::BoundHypothesis(r));
    }
    Ok(2.0 * r * (2f64.powf(kexp) - 1.0))
}

/// `(1+z)^{−k}` on the principal branch of the logarithm.
pub fn principal_pow_neg(one_plus_z: Complex64, kexp: f64) -> Complex64 {
    (one_plus_z.ln() * -kexp).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::ComplexMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Columns of a complex orthogonal matrix (QᵀQ = I) from the Cayley
    /// transform of a complex skew-symmetric matrix.
    fn pseudo_orthonormal(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<ComplexVector> {
        let mut a = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = c(rng.random_range(-scale..scale), rng.random_range(-scale..scale));
                a[(i, j)] = v;
                a[(j, i)] = -v;
            }
        }
        let id = ComplexMatrix::identity(n, n);
        let q = (&id - &a) * (&id + &a).try_inverse().unwrap();
        (0..n).map(|j| q.column(j).into_owned()).collect()
    }

    fn build(zs: &[Complex64], nus: &[ComplexVector]) -> SymTensor3 {
        let mut t = SymTensor3::zeros(nus[0].len());
        for (z, nu) in zs.iter().zip(nus) {
            t.add_scaled_outer3(*z, nu);
        }
        t
    }

    #[test]
    fn fixed_point_converges_in_one_step() {
        let a = 0.4f64;
        let nu = ComplexVector::from_vec(vec![c(a.cosh(), 0.0), c(0.0, a.sinh())]);
        let t = SymTensor3::outer3(&nu).scale(c(2.0, 0.0));
        let (pair, trace) = power_iterate(&t, &nu, 1e-12, 100).unwrap();
        assert_eq!(trace.iterations, 1);
        assert!(trace.converged);
        assert!((pair.z - c(2.0, 0.0)).norm() < 1e-12);
        assert!((&pair.nu - &nu).norm() < 1e-12);
    }

    #[test]
    fn zero_start_is_rejected() {
        let t = SymTensor3::outer3(&ComplexVector::from_vec(vec![ONE, ONE]));
        assert!(matches!(power_iterate(&t, &ComplexVector::zeros(2), 1e-12, 10), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn degenerate_normalizer_is_reported() {
        // T(I, θ, θ) = ν (νᵀθ)², and νᵀν = 0 for ν = (1, i).
        let nu = ComplexVector::from_vec(vec![ONE, c(0.0, 1.0)]);
        let t = SymTensor3::outer3(&nu);
        let theta0 = ComplexVector::from_vec(vec![ONE, ONE]);
        assert!(matches!(power_iterate(&t, &theta0, 1e-12, 10), Err(Error::DegenerateNormalizer)));
    }

    #[test]
    fn dominant_component_is_the_argmax_of_z_times_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let nus = pseudo_orthonormal(&mut rng, 3, 0.3);
        let zs = [c(5.0, 0.0), c(2.0, 1.0), c(-1.0, 0.0)];
        let t = build(&zs, &nus);
        for _ in 0..20 {
            let theta0 = complex_gaussian(&mut rng, 3);
            let expected = (0..3)
                .max_by(|&a, &b| {
                    (zs[a] * pseudo_dot(&nus[a], &theta0))
                        .norm()
                        .total_cmp(&(zs[b] * pseudo_dot(&nus[b], &theta0)).norm())
                })
                .unwrap();
            let (pair, trace) = power_iterate(&t, &theta0, 1e-12, 200).unwrap();
            assert!(trace.converged);
            assert!(sign_aligned_distance(&pair.nu, &nus[expected]) < 1e-8);
            assert!((pair.z - zs[expected]).norm().min((pair.z + zs[expected]).norm()) < 1e-8);
        }
    }

    #[test]
    fn deflation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let nus = pseudo_orthonormal(&mut rng, 3, 0.3);
        let zs = [c(5.0, 0.0), c(2.0, 1.0), c(-1.0, 0.0)];
        let t = build(&zs, &nus);

        let single = SymTensor3::outer3(&nus[0]).scale(zs[0]);
        let pair = EigenPair { z: zs[0], nu: nus[0].clone() };
        assert!(deflate(&single, &pair).unwrap().fro_norm() < 1e-10);

        let rest = deflate(&t, &pair).unwrap();
        assert!(rest.eval3(&nus[0]).unwrap().norm() < 1e-9);

        assert_eq!(deflate(&t, &pair).unwrap(), deflate(&t, &pair.flipped()).unwrap());
    }

    #[test]
    fn decompose_recovers_synthetic_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let nus = pseudo_orthonormal(&mut rng, 3, 0.3);
        let zs = [c(5.0, 0.0), c(2.0, 1.0), c(-1.0, 0.0)];
        let t = build(&zs, &nus);
        let dec = decompose(&t, &DecomposeConfig::new(3, 5, 99)).unwrap();
        let mut got: Vec<Complex64> = dec.pairs.iter().map(|p| p.canonical().z).collect();
        let mut want: Vec<Complex64> =
            zs.iter().zip(&nus).map(|(z, nu)| EigenPair { z: *z, nu: nu.clone() }.canonical().z).collect();
        let key = |z: &Complex64| (z.re * 1e6).round() as i64;
        got.sort_by_key(key);
        want.sort_by_key(key);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-8, "{g} vs {w}");
        }
        let mut recon = SymTensor3::zeros(3);
        for p in &dec.pairs {
            recon.add_scaled_outer3(p.z, &p.nu);
        }
        assert!(recon.sub(&t).unwrap().fro_norm() < 1e-8);
    }

    #[test]
    fn decompose_single_component() {
        let nu = ComplexVector::from_vec(vec![ONE, c(0.0, 0.0)]);
        let t = SymTensor3::outer3(&nu).scale(c(7.0, 0.0));
        let dec = decompose(&t, &DecomposeConfig::new(1, 3, 1)).unwrap();
        assert!((dec.pairs[0].z.norm() - 7.0).abs() < 1e-10);
    }

    #[test]
    fn parallel_and_sequential_restarts_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let nus = pseudo_orthonormal(&mut rng, 4, 0.3);
        let zs = [c(3.0, 0.0), c(0.0, 2.0), c(-1.5, 0.5), c(1.0, 0.0)];
        let t = build(&zs, &nus);
        let mut cfg = DecomposeConfig::new(4, 8, 2024);
        let par = decompose(&t, &cfg).unwrap();
        cfg.parallel = false;
        let seq = decompose(&t, &cfg).unwrap();
        assert_eq!(par.pairs, seq.pairs);
    }

    #[test]
    fn non_convergence_reports_partial_results() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let nus = pseudo_orthonormal(&mut rng, 3, 0.3);
        let t = build(&[c(5.0, 0.0), c(4.9, 0.0), c(4.8, 0.0)], &nus);
        let mut cfg = DecomposeConfig::new(3, 1, 5);
        cfg.power.max_iter = 1;
        match decompose(&t, &cfg) {
            Err(Error::NotConverged { index, partial }) => assert_eq!(partial.len(), index),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn recovery_is_sign_invariant_and_exact_for_rank_one() {
        use crate::whitening::WhiteningPair;
        use nalgebra::{DMatrix, DVector};
        let mu = DVector::from_vec(vec![1.0, 0.0]);
        let m2 = &mu * mu.transpose() * 4.0;
        let wp = WhiteningPair::from_m2(&m2, 1, None).unwrap();
        let pair = EigenPair { z: c(0.5, 0.0), nu: ComplexVector::from_vec(vec![ONE]) };
        for p in [pair.clone(), pair.flipped()] {
            let rec = recover_parameters(&[p], &wp, DEFAULT_IMAG_TOL).unwrap();
            assert!((rec[0].weight - c(4.0, 0.0)).norm() < 1e-12);
            assert!((rec[0].real_mean()[0].abs() - 1.0).abs() < 1e-12);
            assert!(!rec[0].complex_warning);
        }
        let a = recover_parameters(std::slice::from_ref(&pair), &wp, 1e-6).unwrap();
        let b = recover_parameters(&[pair.flipped()], &wp, 1e-6).unwrap();
        assert_eq!(a[0].weight, b[0].weight);
        assert_eq!(a[0].mean, b[0].mean);

        let zero = EigenPair { z: c(0.0, 0.0), nu: ComplexVector::from_vec(vec![ONE]) };
        assert!(matches!(recover_parameters(&[zero], &wp, 1e-6), Err(Error::ZeroEigenvalue)));
        let _ = DMatrix::<f64>::zeros(1, 1);
    }

    #[test]
    fn bound_examples() {
        let nu = ComplexVector::from_vec(vec![ONE]);
        let b = convergence_bound(&[c(3.0, 0.0)], std::slice::from_ref(&nu), &nu, 4).unwrap();
        assert_eq!(b.epsilon_t, 0.0);
        assert_eq!(b.lambda_err_bound, 0.0);
        assert_eq!(b.theta_err_bound, 0.0);

        // ν = e₁, e₂; z = (2, 1); θ₀ = (1, 1): |z₂c₂ / z₁c₁| = 1/2.
        let e1 = ComplexVector::from_vec(vec![ONE, c(0.0, 0.0)]);
        let e2 = ComplexVector::from_vec(vec![c(0.0, 0.0), ONE]);
        let theta0 = ComplexVector::from_vec(vec![ONE, ONE]);
        let b = convergence_bound(&[c(2.0, 0.0), c(1.0, 0.0)], &[e1.clone(), e2.clone()], &theta0, 3).unwrap();
        assert!((b.ratio - 0.5).abs() < 1e-15);
        assert!((b.epsilon_t - b.m / 128.0).abs() < 1e-15);
        assert_eq!(b.m, 4.0);

        let tie = convergence_bound(&[ONE, ONE], &[e1, e2], &theta0, 3);
        assert!(matches!(tie, Err(Error::GapViolated)));
    }

    #[test]
    fn lemma_bound_examples_and_random_check() {
        assert_eq!(sqrt_perturb_bound(c(0.0, 0.0), 0.5).unwrap(), 0.0);
        let z = c(0.3, -0.1);
        let b = sqrt_perturb_bound(z, 0.5).unwrap();
        assert!(b < z.norm());
        assert!(matches!(sqrt_perturb_bound(c(0.5, 0.0), 1.0), Err(Error::BoundHypothesis(_))));

        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..10_000 {
            let r = rng.random_range(0.0..0.5);
            let phi = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let z = Complex64::from_polar(r, phi);
            for k in [0.5, 1.5] {
                let lhs = (principal_pow_neg(ONE + z, k) - ONE).norm();
                assert!(lhs <= sqrt_perturb_bound(z, k).unwrap() + 1e-15);
            }
        }
    }
}
