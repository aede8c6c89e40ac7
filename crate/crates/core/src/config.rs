//! Resource caps shared by the enumeration, summation and iteration routines.

use serde::{Deserialize, Serialize};

/// Caps that bound every search the library performs. The defaults are the
/// ones the command-line tool documents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    /// Maximum number of words a ball enumeration may produce.
    pub enumeration_words: u128,
    /// Maximum word length for exhaustive valid-partition enumeration.
    pub partition_enumeration_len: usize,
    /// Maximum number of terms summed when crossing a threshold.
    pub summation_terms: usize,
    /// Maximum number of blocks examined when deciding a gap bound.
    pub search_blocks: usize,
    /// Maximum horizon for witness constructions that search for `m`.
    pub witness_horizon: usize,
    /// Maximum ambient dimension for subspace systems.
    pub max_dimension: usize,
    /// Default iteration cap for alternating projections.
    pub max_iterations: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            enumeration_words: 1_000_000,
            partition_enumeration_len: 20,
            summation_terms: 10_000_000,
            search_blocks: 100_000,
            witness_horizon: 10_000_000,
            max_dimension: 64,
            max_iterations: 100_000,
        }
    }
}
