//! The sequence space `K = I^ℕ` over a finite alphabet `I = {1, …, N}`.
//!
//! Sequences are either eventually periodic (every entry is determined, so
//! tail properties are decidable) or finite prefixes with an undetermined
//! tail. The metric is `d(x, y) = 2^{-j}` where `j` is the first position at
//! which `x` and `y` differ, so every open ball of radius `2^{-j}` is the set
//! of sequences agreeing with its center on positions `1..=j`. Radii are kept
//! as exact exponents.

use std::cmp::Ordering;
use std::fmt;

use itertools::Itertools;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An alphabet symbol. Valid values are `1..=N`.
pub type Symbol = u32;

/// The index set `I = {1, …, N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Alphabet(u32);

impl Alphabet {
    pub fn new(size: u32) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> u32 {
        self.0
    }

    pub fn contains(self, s: Symbol) -> bool {
        (1..=self.0).contains(&s)
    }

    pub fn check(self, s: Symbol) -> Result<Symbol> {
        if self.contains(s) {
            Ok(s)
        } else {
            Err(Error::IndexOutOfRange {
                index: s,
                size: self.0,
            })
        }
    }

    /// Iterates `1..=N`.
    pub fn symbols(self) -> impl Iterator<Item = Symbol> + Clone {
        1..=self.0
    }
}

impl TryFrom<u32> for Alphabet {
    type Error = Error;
    fn try_from(v: u32) -> Result<Self> {
        Alphabet::new(v)
    }
}

impl From<Alphabet> for u32 {
    fn from(a: Alphabet) -> u32 {
        a.0
    }
}

/// How the entries of a [`SymbolicSequence`] are given.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SeqModel {
    /// `transient` followed by `period` repeated forever.
    EventuallyPeriodic {
        transient: Vec<Symbol>,
        period: Vec<Symbol>,
    },
    /// A finite prefix; nothing is known about later entries.
    FinitePrefix { prefix: Vec<Symbol> },
}

/// An element of `K`, given exactly or as a finite prefix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SequenceJson", into = "SequenceJson")]
pub struct SymbolicSequence {
    alphabet: Alphabet,
    model: SeqModel,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceJson {
    alphabet: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transient: Option<Vec<Symbol>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period: Option<Vec<Symbol>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prefix: Option<Vec<Symbol>>,
}

impl TryFrom<SequenceJson> for SymbolicSequence {
    type Error = Error;
    fn try_from(raw: SequenceJson) -> Result<Self> {
        let alphabet = Alphabet::new(raw.alphabet)?;
        match (raw.transient, raw.period, raw.prefix) {
            (t, Some(p), None) => {
                SymbolicSequence::eventually_periodic(alphabet, t.unwrap_or_default(), p)
            }
            (None, None, Some(prefix)) => SymbolicSequence::finite_prefix(alphabet, prefix),
            _ => Err(Error::InvalidArgument(
                "sequence needs either `period` (with optional `transient`) or `prefix`".into(),
            )),
        }
    }
}

impl From<SymbolicSequence> for SequenceJson {
    fn from(s: SymbolicSequence) -> Self {
        match s.model {
            SeqModel::EventuallyPeriodic { transient, period } => SequenceJson {
                alphabet: s.alphabet.0,
                transient: Some(transient),
                period: Some(period),
                prefix: None,
            },
            SeqModel::FinitePrefix { prefix } => SequenceJson {
                alphabet: s.alphabet.0,
                transient: None,
                period: None,
                prefix: Some(prefix),
            },
        }
    }
}

impl SymbolicSequence {
    pub fn eventually_periodic(
        alphabet: Alphabet,
        transient: Vec<Symbol>,
        period: Vec<Symbol>,
    ) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        for &s in transient.iter().chain(&period) {
            alphabet.check(s)?;
        }
        Ok(SymbolicSequence {
            alphabet,
            model: SeqModel::EventuallyPeriodic { transient, period },
        })
    }

    pub fn periodic(alphabet: Alphabet, period: Vec<Symbol>) -> Result<Self> {
        Self::eventually_periodic(alphabet, Vec::new(), period)
    }

    pub fn finite_prefix(alphabet: Alphabet, prefix: Vec<Symbol>) -> Result<Self> {
        for &s in &prefix {
            alphabet.check(s)?;
        }
        Ok(SymbolicSequence {
            alphabet,
            model: SeqModel::FinitePrefix { prefix },
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn model(&self) -> &SeqModel {
        &self.model
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.model, SeqModel::EventuallyPeriodic { .. })
    }

    /// Number of defined entries, `None` when every entry is determined.
    pub fn horizon(&self) -> Option<usize> {
        match &self.model {
            SeqModel::EventuallyPeriodic { .. } => None,
            SeqModel::FinitePrefix { prefix } => Some(prefix.len()),
        }
    }

    /// `(transient, period)` for eventually periodic sequences.
    pub fn parts(&self) -> Option<(&[Symbol], &[Symbol])> {
        match &self.model {
            SeqModel::EventuallyPeriodic { transient, period } => Some((transient, period)),
            SeqModel::FinitePrefix { .. } => None,
        }
    }

    /// The entry `x_n` (1-based).
    pub fn entry(&self, n: usize) -> Result<Symbol> {
        if n == 0 {
            return Err(Error::InvalidArgument("positions start at 1".into()));
        }
        match &self.model {
            SeqModel::EventuallyPeriodic { transient, period } => {
                if n <= transient.len() {
                    Ok(transient[n - 1])
                } else {
                    Ok(period[(n - 1 - transient.len()) % period.len()])
                }
            }
            SeqModel::FinitePrefix { prefix } => {
                prefix.get(n - 1).copied().ok_or(Error::OutOfHorizon {
                    position: n,
                    horizon: prefix.len(),
                })
            }
        }
    }

    /// The entries `x_1, …, x_len`.
    pub fn prefix(&self, len: usize) -> Result<Vec<Symbol>> {
        match &self.model {
            SeqModel::EventuallyPeriodic { transient, period } => Ok(transient
                .iter()
                .chain(period.iter().cycle())
                .take(len)
                .copied()
                .collect()),
            SeqModel::FinitePrefix { prefix } => {
                if len > prefix.len() {
                    return Err(Error::OutOfHorizon {
                        position: len,
                        horizon: prefix.len(),
                    });
                }
                Ok(prefix[..len].to_vec())
            }
        }
    }

    /// Length after which two eventually periodic sequences that still agree
    /// agree forever: `max transient + lcm(periods)`.
    fn agreement_horizon(&self, other: &Self) -> Option<usize> {
        let (t1, p1) = self.parts()?;
        let (t2, p2) = other.parts()?;
        Some(t1.len().max(t2.len()) + p1.len().lcm(&p2.len()))
    }

    /// Builds a new eventually periodic sequence that keeps `x_1..=j` and then
    /// continues with `tail_transient` followed by `tail_period` forever.
    pub fn splice(
        &self,
        j: usize,
        tail_transient: &[Symbol],
        tail_period: &[Symbol],
    ) -> Result<SymbolicSequence> {
        let mut transient = self.prefix(j)?;
        transient.extend_from_slice(tail_transient);
        SymbolicSequence::eventually_periodic(self.alphabet, transient, tail_period.to_vec())
    }
}

impl fmt::Display for SymbolicSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Symbol]| v.iter().map(|s| s.to_string()).join(",");
        match &self.model {
            SeqModel::EventuallyPeriodic { transient, period } => {
                if transient.is_empty() {
                    write!(f, "({})^ω", join(period))
                } else {
                    write!(f, "({})({})^ω", join(transient), join(period))
                }
            }
            SeqModel::FinitePrefix { prefix } => write!(f, "({})…", join(prefix)),
        }
    }
}

/// An exact dyadic radius `2^{-exp}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DyadicRadius(pub u64);

impl DyadicRadius {
    pub fn exponent(self) -> u64 {
        self.0
    }

    /// `2^{-exp}` as a float; underflows to zero for exponents above ~1074.
    pub fn value(self) -> f64 {
        if self.0 > 1100 {
            0.0
        } else {
            (-(self.0 as f64)).exp2()
        }
    }

    /// Ball-membership in `B(x, 2^{-j})` is exactly agreement on `1..=j`.
    pub fn forced_prefix_length(self) -> usize {
        self.0 as usize
    }
}

pub fn forced_prefix_length(r: DyadicRadius) -> usize {
    r.forced_prefix_length()
}

/// A value of the metric: zero, or `2^{-j}` with `j ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Distance {
    Zero,
    Dyadic(DyadicRadius),
}

impl Distance {
    pub fn value(self) -> f64 {
        match self {
            Distance::Zero => 0.0,
            Distance::Dyadic(r) => r.value(),
        }
    }

    /// Strict comparison against a radius `2^{-e}`.
    pub fn is_less_than(self, r: DyadicRadius) -> bool {
        match self {
            Distance::Zero => true,
            Distance::Dyadic(d) => d.0 > r.0,
        }
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Distance::Zero, Distance::Zero) => Ordering::Equal,
            (Distance::Zero, _) => Ordering::Less,
            (_, Distance::Zero) => Ordering::Greater,
            // larger exponent means smaller distance
            (Distance::Dyadic(a), Distance::Dyadic(b)) => b.0.cmp(&a.0),
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lower/upper bounds on a distance known only up to a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistanceBracket {
    pub lower: Distance,
    pub upper: Distance,
}

impl DistanceBracket {
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

fn first_disagreement(a: &[Symbol], b: &[Symbol]) -> Option<usize> {
    a.iter().zip(b).position(|(u, v)| u != v).map(|i| i + 1)
}

/// Exact distance between two eventually periodic sequences.
pub fn distance(x: &SymbolicSequence, y: &SymbolicSequence) -> Result<Distance> {
    if x.alphabet != y.alphabet {
        return Err(Error::AlphabetMismatch {
            left: x.alphabet.0,
            right: y.alphabet.0,
        });
    }
    let h = x.agreement_horizon(y).ok_or(Error::NotExact)?;
    let (a, b) = (x.prefix(h)?, y.prefix(h)?);
    Ok(match first_disagreement(&a, &b) {
        Some(j) => Distance::Dyadic(DyadicRadius(j as u64)),
        None => Distance::Zero,
    })
}

/// Distance bracket from comparing positions `1..=horizon` only.
pub fn distance_within(
    x: &SymbolicSequence,
    y: &SymbolicSequence,
    horizon: usize,
) -> Result<DistanceBracket> {
    if x.alphabet != y.alphabet {
        return Err(Error::AlphabetMismatch {
            left: x.alphabet.0,
            right: y.alphabet.0,
        });
    }
    let (a, b) = (x.prefix(horizon)?, y.prefix(horizon)?);
    Ok(match first_disagreement(&a, &b) {
        Some(j) => {
            let d = Distance::Dyadic(DyadicRadius(j as u64));
            DistanceBracket { lower: d, upper: d }
        }
        None => DistanceBracket {
            lower: Distance::Zero,
            upper: Distance::Dyadic(DyadicRadius(horizon as u64 + 1)),
        },
    })
}

/// Whether `word` lies in `B(center, 2^{-j})`, i.e. agrees with `center_prefix`
/// on the first `j` positions.
pub fn in_ball(center_prefix: &[Symbol], r: DyadicRadius, word: &[Symbol]) -> bool {
    let j = r.forced_prefix_length();
    word.len() >= j && center_prefix.len() >= j && word[..j] == center_prefix[..j]
}

/// Every word of length `len` over the alphabet, in lexicographic order.
pub fn all_words(alphabet: Alphabet, len: usize, cap: u128) -> Result<Vec<Vec<Symbol>>> {
    let count = (alphabet.0 as u128)
        .checked_pow(len as u32)
        .unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::CapExceeded {
            what: "word enumeration",
            requested: count,
            cap,
        });
    }
    if len == 0 {
        return Ok(vec![Vec::new()]);
    }
    Ok(std::iter::repeat_n(alphabet.symbols(), len)
        .multi_cartesian_product()
        .collect())
}

/// The length-`(j + extra)` prefixes of all members of `B(center, 2^{-j})`.
pub fn enumerate_ball_prefixes(
    center: &SymbolicSequence,
    r: DyadicRadius,
    extra: usize,
    cap: u128,
) -> Result<Vec<Vec<Symbol>>> {
    let forced = center.prefix(r.forced_prefix_length())?;
    let tails = all_words(center.alphabet, extra, cap)?;
    Ok(tails
        .into_iter()
        .map(|t| {
            let mut w = forced.clone();
            w.extend(t);
            w
        })
        .collect())
}
