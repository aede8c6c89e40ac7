use thiserror::Error;

/// Errors produced by the sequence, classification, porosity and projection layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,

    #[error("index {index} outside the alphabet 1..={size}")]
    IndexOutOfRange { index: u32, size: u32 },

    #[error("period of an eventually periodic sequence must be nonempty")]
    EmptyPeriod,

    #[error("position {position} lies beyond the defined horizon {horizon}")]
    OutOfHorizon { position: usize, horizon: usize },

    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: u32, right: u32 },

    #[error("{what}: requested {requested} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("block length L = {l} is smaller than the alphabet size {n}")]
    LTooSmall { l: usize, n: u32 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("undecidable at the available horizon: {0}")]
    UndecidableAtHorizon(String),

    #[error("operation requires an eventually periodic sequence")]
    NotExact,

    #[error("weight at block {block} is not positive ({value})")]
    NonpositiveWeight { block: usize, value: f64 },

    #[error("divergence too slow: level {level} not completed within {cap} terms")]
    DivergenceTooSlow { level: usize, cap: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("epsilon 2^-{epsilon_exp} is not below the admissible bound 2^-{min_exp_exclusive} (exponent must exceed it)")]
    EpsilonTooLarge {
        epsilon_exp: u64,
        min_exp_exclusive: u64,
    },

    #[error("prefix too short: need {needed} entries, have {available}")]
    PrefixTooShort { needed: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
