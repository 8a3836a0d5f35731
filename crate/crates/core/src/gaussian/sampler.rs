//! Rejection sampling from `α f − (α−1) g` and the dataset container.

use std::collections::VecDeque;
use std::io::{Read, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use super::SphericalMixture;
use crate::error::{Error, Result};
use crate::rng::rng_for;

/// Proposals per sliding window of the low-acceptance guard.
pub const ACCEPTANCE_WINDOW: usize = 10_000;

/// `N` samples in `n` dimensions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!("{} values do not fill rows of width {dim}", values.len())));
        }
        Ok(Self { dim, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("rows of unequal length".into()));
        }
        Self::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn column_mean(&self, j: usize) -> f64 {
        self.rows().map(|r| r[j]).sum::<f64>() / self.len() as f64
    }

    /// One sample per line, no quoting. `header` skips the first line.
    pub fn read_csv<R: Read>(reader: R, header: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(header).trim(csv::Trim::All).from_reader(reader);
        let mut dim = None;
        let mut values = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let width = *dim.get_or_insert(record.len());
            if record.len() != width {
                return Err(Error::Shape(format!("row {line} has {} columns, expected {width}", record.len())));
            }
            for field in record.iter() {
                values.push(
                    field.parse::<f64>().map_err(|e| Error::InvalidInput(format!("row {line}: {field:?}: {e}")))?,
                );
            }
        }
        Self::new(dim.unwrap_or(0), values)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for row in self.rows() {
            wtr.write_record(row.iter().map(|x| x.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SampleOutput {
    pub data: Dataset,
    pub proposals: usize,
    pub accepted: usize,
}

impl SampleOutput {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposals as f64
    }
}

/// Draws from a positive-weight spherical mixture.
struct Proposal<'a> {
    mix: &'a SphericalMixture,
    pick: WeightedIndex<f64>,
    sd: Vec<f64>,
}

impl<'a> Proposal<'a> {
    fn new(mix: &'a SphericalMixture) -> Result<Self> {
        if mix.weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidInput("proposal mixture must have nonnegative weights".into()));
        }
        let pick = WeightedIndex::new(&mix.weights).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(Self { mix, pick, sd: mix.variances.iter().map(|v| v.sqrt()).collect() })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let i = self.pick.sample(rng);
        for (o, m) in out.iter_mut().zip(self.mix.means[i].iter()) {
            *o = m + self.sd[i] * rng.sample::<f64, _>(StandardNormal);
        }
    }
}

/// Draw `x ~ f`, `e ~ U[0, 1]`, and keep `x` when `e α f(x) ≥ (α−1) g(x)`,
/// until `n` samples are accepted.
///
/// Fails when fewer than `1/(10α)` of the last [`ACCEPTANCE_WINDOW`]
/// proposals were accepted, which signals an invalid `α`.
pub fn rejection_sample(
    f: &SphericalMixture,
    g: Option<&SphericalMixture>,
    alpha: f64,
    n: usize,
    seed: u64,
) -> Result<SampleOutput> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidInput(format!("α must be at least 1, got {alpha}")));
    }
    if let Some(g) = g {
        if g.dim() != f.dim() {
            return Err(Error::Shape(format!("f has dim {} but g has dim {}", f.dim(), g.dim())));
        }
    }
    let proposal = Proposal::new(f)?;
    let mut rng = rng_for(seed, 0);
    let dim = f.dim();
    let mut values = Vec::with_capacity(n * dim);
    let mut x = vec![0.0; dim];
    let mut window: VecDeque<bool> = VecDeque::with_capacity(ACCEPTANCE_WINDOW);
    let mut in_window = 0usize;
    let threshold = 1.0 / (10.0 * alpha);
    let (mut proposals, mut accepted) = (0usize, 0usize);

    while accepted < n {
        proposal.draw(&mut rng, &mut x);
        let e: f64 = rng.random();
        proposals += 1;
        let keep = match g {
            Some(g) if alpha > 1.0 => e * alpha * f.pdf(&x) >= (alpha - 1.0) * g.pdf(&x),
            _ => true,
        };
        if keep {
            values.extend_from_slice(&x);
            accepted += 1;
        }
        window.push_back(keep);
        in_window += keep as usize;
        if window.len() > ACCEPTANCE_WINDOW {
            in_window -= window.pop_front().unwrap() as usize;
        }
        if window.len() == ACCEPTANCE_WINDOW {
            let rate = in_window as f64 / ACCEPTANCE_WINDOW as f64;
            if rate < threshold {
                return Err(Error::LowAcceptance { rate, threshold });
            }
        }
    }
    Ok(SampleOutput { data: Dataset::new(dim, values)?, proposals, accepted })
}

/// Sample a signed mixture by splitting it into `f` = normalized positive
/// part, `g` = normalized negative part, and `α` = positive mass.
pub fn sample_mixture(model: &SphericalMixture, n: usize, seed: u64) -> Result<SampleOutput> {
    let ((f, alpha), neg) = model.split_signs();
    match neg {
        Some((g, _)) => rejection_sample(&f, Some(&g), alpha, n, seed),
        None => rejection_sample(&f, None, 1.0, n, seed),
    }
}
