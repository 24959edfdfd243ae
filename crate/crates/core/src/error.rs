use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("radix must be at least 2, got {0}")]
    InvalidRadix(u64),

    #[error("alpha = {num}/{den} is not in the open interval (1, 2)")]
    AlphaOutOfRange { num: u64, den: u64 },

    #[error("cannot parse rational {0:?}; expected \"num/den\"")]
    ParseRational(String),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("bound too small: need {needed}, have {bound}")]
    BoundTooSmall { needed: u64, bound: u64 },

    #[error("term {index} does not fit in a machine word")]
    TermOverflow { index: usize },

    #[error("operation needs exact terms but the table was built in deltas-only mode")]
    DeltasOnly,

    #[error("gap bound violated at position {position}: {left} -> {right} (K = {bound})")]
    GapBoundViolated {
        position: usize,
        left: i64,
        right: i64,
        bound: u64,
    },

    #[error("empty input")]
    Empty,

    #[error("{0}")]
    InvalidParameter(String),

    #[error("not a subset-sum set: {0} is reachable but absent")]
    NotSubsetSumSet(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("search for W({s},{k}) is infeasible at desk scale (node budget {budget} exhausted)")]
    Infeasible { s: usize, k: usize, budget: u64 },

    #[error("no witness at this depth: {x} > s_n = {top}")]
    NoWitness { x: u64, top: u64 },

    #[error("bad bitmap file: {0}")]
    BadBitmap(String),

    #[error("bad table file: {0}")]
    BadTable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
