//! Rational series over finite alphabets and their signed decomposition into
//! probabilistic automata.
//!
//! A linear representation `⟨ι, (M_x)_{x∈Σ}, τ⟩` computes
//! `r(u₁…uₙ) = ιᵀ M_{u₁} ⋯ M_{uₙ} τ`. When `ρ(M_Σ) < 1` with
//! `M_Σ = Σₓ M_x`, the total mass is `r(Σ*) = ιᵀ (I − M_Σ)⁻¹ τ`.

mod examples;
mod pa;
mod reduce;

pub use examples::{abs_convergent_fixture, one_letter_example, printed_pa_minus, printed_pa_plus};
pub use pa::{normalize_to_pa, pa_check, to_pa_mixture, PAMixture, PaReport, ProbAutomaton};
pub use reduce::{minimize, trim};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::spectral_radius;

/// Margin below 1 required of the spectral radius of `M_Σ`.
pub const RADIUS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRep {
    alphabet: Vec<String>,
    iota: DVector<f64>,
    tau: DVector<f64>,
    matrices: Vec<DMatrix<f64>>,
}

#[derive(Serialize, Deserialize)]
struct WfaJson {
    alphabet: Vec<String>,
    dim: usize,
    iota: Vec<f64>,
    tau: Vec<f64>,
    matrices: BTreeMap<String, Vec<Vec<f64>>>,
}

impl LinearRep {
    /// `matrices[i]` belongs to `alphabet[i]`.
    pub fn new(
        alphabet: Vec<String>,
        iota: DVector<f64>,
        matrices: Vec<DMatrix<f64>>,
        tau: DVector<f64>,
    ) -> Result<Self> {
        let n = iota.len();
        if tau.len() != n {
            return Err(Error::Shape(format!("ι has length {n} but τ has length {}", tau.len())));
        }
        if alphabet.len() != matrices.len() {
            return Err(Error::Shape(format!("{} symbols but {} matrices", alphabet.len(), matrices.len())));
        }
        if let Some(m) = matrices.iter().find(|m| m.shape() != (n, n)) {
            return Err(Error::Shape(format!("transition matrix is {:?}, expected {n}×{n}", m.shape())));
        }
        let mut seen = alphabet.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != alphabet.len() {
            return Err(Error::InvalidInput("repeated alphabet symbol".into()));
        }
        Ok(Self { alphabet, iota, tau, matrices })
    }

    /// A representation over the single letter `a`.
    pub fn one_letter(iota: DVector<f64>, m: DMatrix<f64>, tau: DVector<f64>) -> Result<Self> {
        Self::new(vec!["a".into()], iota, vec![m], tau)
    }

    pub fn dim(&self) -> usize {
        self.iota.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn iota(&self) -> &DVector<f64> {
        &self.iota
    }

    pub fn tau(&self) -> &DVector<f64> {
        &self.tau
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn matrix(&self, symbol: &str) -> Option<&DMatrix<f64>> {
        self.alphabet.iter().position(|s| s == symbol).map(|i| &self.matrices[i])
    }

    /// `M_Σ = Σₓ M_x`.
    pub fn m_sigma(&self) -> DMatrix<f64> {
        self.matrices.iter().fold(DMatrix::zeros(self.dim(), self.dim()), |acc, m| acc + m)
    }

    pub fn with_iota(&self, iota: DVector<f64>) -> Result<Self> {
        Self::new(self.alphabet.clone(), iota, self.matrices.clone(), self.tau.clone())
    }

    /// Every coefficient of `ι`, `τ` and each `M_x` at least `-tol`.
    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.iota.iter().chain(self.tau.iter()).chain(self.matrices.iter().flat_map(|m| m.iter())).all(|&x| x >= -tol)
    }

    /// Map each symbol of `word` to its index in the alphabet.
    pub fn symbol_indices<S: AsRef<str>>(&self, word: &[S]) -> Result<Vec<usize>> {
        word.iter()
            .map(|s| {
                self.alphabet
                    .iter()
                    .position(|a| a == s.as_ref())
                    .ok_or_else(|| Error::UnknownSymbol(s.as_ref().to_string()))
            })
            .collect()
    }

    /// Split a textual word into symbols: whitespace or comma separated when
    /// it contains either, one character per symbol otherwise.
    pub fn parse_word(&self, text: &str) -> Vec<String> {
        if text.contains([' ', ',']) {
            text.split([' ', ',']).filter(|s| !s.is_empty()).map(str::to_string).collect()
        } else {
            text.chars().map(|c| c.to_string()).collect()
        }
    }

    pub fn eval_word<S: AsRef<str>>(&self, word: &[S]) -> Result<f64> {
        let idx = self.symbol_indices(word)?;
        Ok(self.eval_indices(&idx))
    }

    pub fn eval_indices(&self, word: &[usize]) -> f64 {
        let row = word.iter().fold(self.iota.transpose(), |row, &i| row * &self.matrices[i]);
        (row * &self.tau)[(0, 0)]
    }

    /// `r(aⁿ)` for the first symbol of the alphabet.
    pub fn eval_power(&self, n: usize) -> f64 {
        self.eval_indices(&vec![0; n])
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.m_sigma())
    }

    /// `ιᵀ (I − M_Σ)⁻¹ τ`; fails unless `ρ(M_Σ) < 1 − RADIUS_TOL`.
    pub fn series_sum(&self) -> Result<f64> {
        Ok(self.iota.dot(&self.state_sums()?))
    }

    /// `(I − M_Σ)⁻¹ τ`: the mass of all suffixes from each state.
    pub fn state_sums(&self) -> Result<DVector<f64>> {
        let radius = self.spectral_radius();
        if !(radius < 1.0 - RADIUS_TOL) {
            return Err(Error::Divergent(radius));
        }
        let n = self.dim();
        let a = DMatrix::identity(n, n) - self.m_sigma();
        a.lu().solve(&self.tau).ok_or(Error::Divergent(radius))
    }

    /// Two nonnegative representations of dimension `2n` whose difference is `r`:
    /// `ι̃₁ = (ι⁺; ι⁻)`, `ι̃₂ = (ι⁻; ι⁺)`, `τ̃ = (τ⁺; τ⁻)`, `M̃ₓ = [[Mₓ⁺, Mₓ⁻], [Mₓ⁻, Mₓ⁺]]`.
    pub fn split_difference(&self) -> (LinearRep, LinearRep) {
        let pos = |x: f64| x.max(0.0);
        let neg = |x: f64| (-x).max(0.0);
        let stack = |a: DVector<f64>, b: DVector<f64>| {
            DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
        };
        let n = self.dim();
        let matrices: Vec<DMatrix<f64>> = self
            .matrices
            .iter()
            .map(|m| {
                let (mp, mn) = (m.map(pos), m.map(neg));
                let mut out = DMatrix::zeros(2 * n, 2 * n);
                out.view_mut((0, 0), (n, n)).copy_from(&mp);
                out.view_mut((n, n), (n, n)).copy_from(&mp);
                out.view_mut((0, n), (n, n)).copy_from(&mn);
                out.view_mut((n, 0), (n, n)).copy_from(&mn);
                out
            })
            .collect();
        let tau = stack(self.tau.map(pos), self.tau.map(neg));
        let plus = LinearRep {
            alphabet: self.alphabet.clone(),
            iota: stack(self.iota.map(pos), self.iota.map(neg)),
            tau: tau.clone(),
            matrices: matrices.clone(),
        };
        let minus = LinearRep {
            alphabet: self.alphabet.clone(),
            iota: stack(self.iota.map(neg), self.iota.map(pos)),
            tau,
            matrices,
        };
        (plus, minus)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(s)?)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let raw: WfaJson = serde_json::from_value(value)?;
        if raw.iota.len() != raw.dim {
            return Err(Error::Shape(format!("dim = {} but ι has length {}", raw.dim, raw.iota.len())));
        }
        let n = raw.dim;
        let mut matrices = Vec::with_capacity(raw.alphabet.len());
        for sym in &raw.alphabet {
            let rows =
                raw.matrices.get(sym).ok_or_else(|| Error::InvalidInput(format!("no matrix for symbol {sym:?}")))?;
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Shape(format!("matrix for {sym:?} is not {n}×{n}")));
            }
            matrices.push(DMatrix::from_fn(n, n, |i, j| rows[i][j]));
        }
        if let Some(extra) = raw.matrices.keys().find(|k| !raw.alphabet.contains(k)) {
            return Err(Error::UnknownSymbol(extra.clone()));
        }
        Self::new(raw.alphabet, DVector::from_vec(raw.iota), matrices, DVector::from_vec(raw.tau))
    }

    pub fn to_value(&self) -> serde_json::Value {
        let raw = WfaJson {
            alphabet: self.alphabet.clone(),
            dim: self.dim(),
            iota: self.iota.iter().copied().collect(),
            tau: self.tau.iter().copied().collect(),
            matrices: self
                .alphabet
                .iter()
                .zip(&self.matrices)
                .map(|(s, m)| (s.clone(), m.row_iter().map(|r| r.iter().copied().collect()).collect()))
                .collect(),
        };
        serde_json::to_value(raw).expect("plain numeric data serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("plain numeric data serializes")
    }
}

/// Every word of length at most `max_len`, as symbol-index sequences in
/// length-lexicographic order.
pub fn words_up_to(alphabet_size: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * alphabet_size);
        for w in &frontier {
            for s in 0..alphabet_size {
                let mut v = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
