use thiserror::Error;

/// Errors raised by the exact engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("probabilities must be strictly positive (atom {atom})")]
    NonPositiveProbability { atom: usize },

    #[error("probabilities sum to {sum}, expected exactly 1")]
    ProbabilitiesDoNotSumToOne { sum: String },

    #[error("invalid partition at {context}: {reason}")]
    InvalidPartition { context: String, reason: String },

    #[error("partition at t = {t} does not refine the partition at t = {prev}")]
    NotRefining { t: usize, prev: usize },

    #[error("time {t} outside 0..={horizon}")]
    TimeOutOfRange { t: usize, horizon: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{what} is not measurable at t = {t}: cell {cell} carries distinct values")]
    NotMeasurable { what: String, t: usize, cell: usize },

    #[error("process is not of indicator form at (t = {t}, atom {atom})")]
    NotIndicator { t: usize, atom: usize },

    #[error("compensator jump {jump} >= 1 at (t = {t}, atom {atom})")]
    PredictableJumpToCertainty { t: usize, atom: usize, jump: String },

    #[error("random time is infinite or beyond the horizon on atom {atom}")]
    InfiniteRandomTime { atom: usize },

    #[error("{what} is not measurable with respect to the ambient sigma-field")]
    NotAmbientMeasurable { what: String },

    #[error("density must be strictly positive (atom {atom})")]
    NonPositiveDensity { atom: usize },

    #[error("density does not integrate to 1 (got {mass})")]
    DensityNotNormalized { mass: String },

    #[error("inconsistent signal law: label {label} has gamma {given}, empirical law {actual}")]
    InconsistentSignal { label: String, given: String, actual: String },

    #[error("label subset has zero probability")]
    NullLabelSet,

    #[error("not a deflator: {0}")]
    NotADeflator(String),

    #[error(
        "asset {asset} jumps at the jump-to-zero time (t = {t}, atom {atom}{})",
        label.as_ref().map(|l| format!(", label {l}")).unwrap_or_default()
    )]
    JumpAtEta {
        label: Option<String>,
        asset: usize,
        t: usize,
        atom: usize,
    },

    #[error(
        "deflator jumps at the jump-to-zero time (t = {t}, atom {atom}{})",
        label.as_ref().map(|l| format!(", label {l}")).unwrap_or_default()
    )]
    DeflatorJumpAtEta {
        label: Option<String>,
        t: usize,
        atom: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
