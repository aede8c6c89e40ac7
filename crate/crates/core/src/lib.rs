//! Projection-order sequences over a finite alphabet: the sequence space and
//! its metric, greedy block partitions, quasi-normality and the sets used to
//! show it is generic, porosity witnesses with checkable certificates, and
//! the method of alternating projections on subspace systems.

pub mod classify;
pub mod config;
pub mod error;
pub mod generators;
pub mod hilbert;
pub mod interval;
pub mod parallel;
pub mod partition;
pub mod porosity;
pub mod seqspace;

pub use error::{Error, Result};
