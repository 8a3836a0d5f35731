use thiserror::Error;

use crate::power::EigenPair;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("M2 has numerical rank < {k} (eigenvalue modulus {modulus:e} below rank_tol {rank_tol:e})")]
    RankDeficient { k: usize, modulus: f64, rank_tol: f64 },

    #[error("cannot whiten: singular M2")]
    SingularWhitening,

    #[error("degenerate normalizer; restart with new θ0")]
    DegenerateNormalizer,

    #[error("component {index} did not converge")]
    NotConverged { index: usize, partial: Vec<EigenPair> },

    #[error("zero eigenvalue; cannot invert")]
    ZeroEigenvalue,

    #[error("gap assumption violated")]
    GapViolated,

    #[error("bound hypothesis violated: |z| = {0} is not below 1/2")]
    BoundHypothesis(f64),

    #[error("distributions must be distinct")]
    IdenticalDistributions,

    #[error("degenerate envelope (semi-definite)")]
    DegenerateEnvelope,

    #[error("suspiciously low acceptance; model may be invalid (rate {rate:.3e} < {threshold:.3e})")]
    LowAcceptance { rate: f64, threshold: f64 },

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("all candidates failed: {}", format_failures(.0))]
    AllCandidatesFailed(Vec<(usize, String)>),

    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),

    #[error("series sum divergent or marginal (spectral radius {0:.6})")]
    Divergent(f64),

    #[error("representation not normalizable (non-minimal or degenerate)")]
    NotNormalizable,

    #[error("split diverges; supply an absolutely-convergent representation")]
    SplitDiverges,

    #[error("representation is not a probability distribution (series sum {0})")]
    NotDistribution(f64),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_failures(failures: &[(usize, String)]) -> String {
    failures.iter().map(|(i, msg)| format!("candidate {i}: {msg}")).collect::<Vec<_>>().join("; ")
}

impl Error {
    /// True for failures caused by the numerics rather than by bad input or IO.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Shape(_)
                | Error::InvalidInput(_)
                | Error::UnknownSymbol(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::Io(_)
        )
    }
}
