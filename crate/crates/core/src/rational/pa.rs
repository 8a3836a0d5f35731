//! Probabilistic automata and the two-automaton signed mixture.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::reduce::trim;
use super::LinearRep;
use crate::error::{Error, Result};

/// Tolerance on `ιᵀ1 = 1`.
const IOTA_SUM_TOL: f64 = 1e-10;
/// Tolerance on `(I − M_Σ)⁻¹τ = 1`.
const TERMINATION_TOL: f64 = 1e-8;
/// State sums below this make the diagonal rescaling singular.
const STATE_SUM_FLOOR: f64 = 1e-10;

/// Violated probabilistic-automaton conditions. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PaReport {
    /// `(location, value)`, e.g. `("iota[2]", -0.1)` or `("M[a][0][1]", -0.3)`.
    pub negative_entries: Vec<(String, f64)>,
    /// `ιᵀ1 − 1` when outside tolerance.
    pub iota_sum_deviation: Option<f64>,
    pub singular: bool,
    /// `max |((I − M_Σ)⁻¹τ)ᵢ − 1|` when outside tolerance.
    pub termination_deviation: Option<f64>,
}

impl PaReport {
    pub fn is_valid(&self) -> bool {
        self.negative_entries.is_empty()
            && self.iota_sum_deviation.is_none()
            && !self.singular
            && self.termination_deviation.is_none()
    }
}

impl fmt::Display for PaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid probabilistic automaton");
        }
        let mut parts = Vec::new();
        for (loc, v) in &self.negative_entries {
            parts.push(format!("negative entry {loc} = {v}"));
        }
        if let Some(d) = self.iota_sum_deviation {
            parts.push(format!("initial weights sum to 1{d:+e}"));
        }
        if self.singular {
            parts.push("I - M_Sigma is not invertible".into());
        }
        if let Some(d) = self.termination_deviation {
            parts.push(format!("(I - M_Sigma)^-1 tau deviates from 1 by {d:e}"));
        }
        write!(f, "{}", parts.join("; "))
    }
}

/// Check `ι, τ, Mₓ ≥ 0`, `ιᵀ1 = 1`, `I − M_Σ` invertible and `(I − M_Σ)⁻¹τ = 1`.
pub fn pa_check(rep: &LinearRep) -> PaReport {
    let mut report = PaReport::default();
    let mut flag = |loc: String, v: f64| {
        if v < 0.0 {
            report.negative_entries.push((loc, v));
        }
    };
    rep.iota().iter().enumerate().for_each(|(i, &v)| flag(format!("iota[{i}]"), v));
    for (sym, m) in rep.alphabet().iter().zip(rep.matrices()) {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                flag(format!("M[{sym}][{i}][{j}]"), m[(i, j)]);
            }
        }
    }
    rep.tau().iter().enumerate().for_each(|(i, &v)| flag(format!("tau[{i}]"), v));

    let dev = rep.iota().sum() - 1.0;
    if dev.abs() > IOTA_SUM_TOL {
        report.iota_sum_deviation = Some(dev);
    }
    let n = rep.dim();
    let a = DMatrix::identity(n, n) - rep.m_sigma();
    let sv = a.singular_values();
    let regular = n == 0 || sv.min() > 1e-12 * sv.max().max(1.0);
    match a.lu().solve(rep.tau()).filter(|_| regular) {
        Some(x) => {
            let worst = x.iter().fold(0.0f64, |w, v| w.max((v - 1.0).abs()));
            if worst > TERMINATION_TOL {
                report.termination_deviation = Some(worst);
            }
        }
        None => report.singular = true,
    }
    report
}

/// A representation that passed [`pa_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbAutomaton {
    rep: LinearRep,
}

impl ProbAutomaton {
    pub fn new(rep: LinearRep) -> Result<Self> {
        let report = pa_check(&rep);
        if !report.is_valid() {
            return Err(Error::InvalidInput(format!("not a probabilistic automaton: {report}")));
        }
        Ok(Self { rep })
    }

    pub fn rep(&self) -> &LinearRep {
        &self.rep
    }

    pub fn into_rep(self) -> LinearRep {
        self.rep
    }
}

/// Rescale a nonnegative representation into a probabilistic automaton:
/// with `λ = (I − M_Σ)⁻¹τ` and `D = diag(λ)`, return `⟨Dι, D⁻¹MₓD, D⁻¹τ⟩`.
///
/// The input must sum to 1 for the result to be a distribution.
pub fn normalize_to_pa(rep: &LinearRep) -> Result<ProbAutomaton> {
    if !rep.is_nonnegative(0.0) {
        return Err(Error::InvalidInput("normalization needs nonnegative coefficients".into()));
    }
    let lambda = rep.state_sums()?;
    if lambda.iter().any(|l| l.abs() < STATE_SUM_FLOOR) {
        return Err(Error::NotNormalizable);
    }
    let iota = rep.iota().component_mul(&lambda);
    let tau = rep.tau().component_div(&lambda);
    let n = rep.dim();
    let matrices: Vec<DMatrix<f64>> =
        rep.matrices().iter().map(|m| DMatrix::from_fn(n, n, |i, j| m[(i, j)] * lambda[j] / lambda[i])).collect();
    let out = LinearRep::new(rep.alphabet().to_vec(), iota, matrices, tau)?;
    let total = out.iota().sum();
    if (total - 1.0).abs() > IOTA_SUM_TOL.max(1e-9) {
        return Err(Error::NotDistribution(total));
    }
    ProbAutomaton::new(out)
}

/// `r = s⁺ p⁺ − s⁻ p⁻` with `p±` probabilistic automata and `s⁺ − s⁻ = 1`.
#[derive(Debug, Clone)]
pub struct PAMixture {
    pub s_plus: f64,
    pub pa_plus: ProbAutomaton,
    /// Stored as a nonnegative magnitude.
    pub s_minus: f64,
    pub pa_minus: Option<ProbAutomaton>,
}

#[derive(Serialize, Deserialize)]
struct PAMixtureJson {
    s_plus: f64,
    pa_plus: serde_json::Value,
    s_minus: f64,
    pa_minus: Option<serde_json::Value>,
}

impl PAMixture {
    pub fn eval_word<S: AsRef<str>>(&self, word: &[S]) -> Result<f64> {
        let plus = self.pa_plus.rep().eval_word(word)?;
        let minus = match &self.pa_minus {
            Some(p) => p.rep().eval_word(word)?,
            None => 0.0,
        };
        Ok(self.s_plus * plus - self.s_minus * minus)
    }

    pub fn to_json(&self) -> String {
        let raw = PAMixtureJson {
            s_plus: self.s_plus,
            pa_plus: self.pa_plus.rep().to_value(),
            s_minus: self.s_minus,
            pa_minus: self.pa_minus.as_ref().map(|p| p.rep().to_value()),
        };
        serde_json::to_string_pretty(&raw).expect("plain numeric data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: PAMixtureJson = serde_json::from_str(s)?;
        Ok(Self {
            s_plus: raw.s_plus,
            pa_plus: ProbAutomaton::new(LinearRep::from_value(raw.pa_plus)?)?,
            s_minus: raw.s_minus,
            pa_minus: raw.pa_minus.map(|v| LinearRep::from_value(v).and_then(ProbAutomaton::new)).transpose()?,
        })
    }
}

/// Split `r` into positive and negative parts, normalize each to a
/// probabilistic automaton after trimming useless states, and return the
/// mixture weights. With `assume_distribution`, `r(Σ*) = 1` is checked first.
pub fn to_pa_mixture(rep: &LinearRep, assume_distribution: bool) -> Result<PAMixture> {
    if assume_distribution {
        let total = rep.series_sum()?;
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::NotDistribution(total));
        }
    }
    let (plus, minus) = rep.split_difference();
    let plus = trim(&plus);
    let minus = trim(&minus);
    let (s_plus, pa_plus) = scaled_pa(&plus)?.ok_or(Error::NotDistribution(0.0))?;
    let (s_minus, pa_minus) = match scaled_pa(&minus)? {
        Some((s, pa)) => (s, Some(pa)),
        None => (0.0, None),
    };
    Ok(PAMixture { s_plus, pa_plus, s_minus, pa_minus })
}

/// Total mass and normalized automaton of a trimmed nonnegative part, or
/// `None` when the part carries no mass.
fn scaled_pa(part: &LinearRep) -> Result<Option<(f64, ProbAutomaton)>> {
    if part.dim() == 0 {
        return Ok(None);
    }
    let mass = part.series_sum().map_err(|e| match e {
        Error::Divergent(_) => Error::SplitDiverges,
        other => other,
    })?;
    if mass <= 0.0 {
        return Ok(None);
    }
    let scaled = part.with_iota(part.iota() / mass)?;
    Ok(Some((mass, normalize_to_pa(&scaled)?)))
}
