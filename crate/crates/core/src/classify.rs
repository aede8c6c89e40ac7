//! Quasi-normality and membership in the exceptional sets.
//!
//! Exact verdicts are only produced for eventually periodic sequences. For a
//! finite prefix the best available answer is a one-sided exclusion: a finite
//! computation showing that *no* extension of the prefix belongs to the set.
//!
//! The sets are, for block length `L`:
//!
//! * `A{L, M}`: the greedy `L`-partition exists and `Σ 1/r_k < (1/L)·ln M`;
//! * `B{L, k}`: the greedy `L`-partition has at most `k` blocks;
//! * `F{n, M}`: the symbol `n` occurs fewer than `M` times;
//! * `NLc{L, p}`: some block representation has `Σ_{i≤k} |S_i| ≤ p(k)` for all `k`;
//! * `NfWeighted{L, M, f}`: the greedy partition exists and `Σ 1/(r_k f(r_k)) < M`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::error::{Error, Result};
use crate::interval::{reciprocal_sum, Interval};
use crate::partition::{
    check_block_len, covers, decompose, greedy_partition, greedy_starts_in_word, GreedyPartition,
    GreedyStatus,
};
use crate::seqspace::{Alphabet, SeqModel, Symbol, SymbolicSequence};

// ---------------------------------------------------------------------------
// Bound functions p_c

/// Serializable shapes of a gap bound `p(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundSpec {
    /// `p(k) = c·k`
    Linear { c: f64 },
    /// `p(k) = slope·k + intercept`
    Affine { slope: f64, intercept: f64 },
    /// `p(k) = coef·k^exponent`
    Power { coef: f64, exponent: f64 },
    /// `p(k) = value`
    Constant { value: f64 },
}

type BoundEval = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// An increasing bound `p: ℕ → (0, ∞)` on cumulative gap lengths.
#[derive(Clone)]
pub struct BoundFunction {
    repr: BoundRepr,
}

#[derive(Clone)]
enum BoundRepr {
    Spec(BoundSpec),
    Custom { name: String, eval: BoundEval },
}

impl fmt::Debug for BoundFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            BoundRepr::Spec(s) => write!(f, "BoundFunction({s:?})"),
            BoundRepr::Custom { name, .. } => write!(f, "BoundFunction(custom {name})"),
        }
    }
}

impl PartialEq for BoundFunction {
    fn eq(&self, other: &Self) -> bool {
        match (&self.repr, &other.repr) {
            (BoundRepr::Spec(a), BoundRepr::Spec(b)) => a == b,
            (BoundRepr::Custom { eval: a, .. }, BoundRepr::Custom { eval: b, .. }) => {
                Arc::ptr_eq(a, b)
            }
            _ => false,
        }
    }
}

impl Serialize for BoundFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.repr {
            BoundRepr::Spec(spec) => spec.serialize(s),
            BoundRepr::Custom { name, .. } => Err(S::Error::custom(format!(
                "custom bound `{name}` has no serialized form"
            ))),
        }
    }
}

impl<'de> Deserialize<'de> for BoundFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        BoundSpec::deserialize(d).map(BoundFunction::from)
    }
}

impl From<BoundSpec> for BoundFunction {
    fn from(spec: BoundSpec) -> Self {
        BoundFunction {
            repr: BoundRepr::Spec(spec),
        }
    }
}

impl BoundFunction {
    pub fn linear(c: f64) -> Self {
        BoundSpec::Linear { c }.into()
    }

    pub fn constant(value: f64) -> Self {
        BoundSpec::Constant { value }.into()
    }

    /// A black-box bound. It must be re-entrant.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        BoundFunction {
            repr: BoundRepr::Custom {
                name: name.into(),
                eval: Arc::new(eval),
            },
        }
    }

    pub fn spec(&self) -> Option<&BoundSpec> {
        match &self.repr {
            BoundRepr::Spec(s) => Some(s),
            BoundRepr::Custom { .. } => None,
        }
    }

    pub fn eval(&self, k: u64) -> f64 {
        let kf = k as f64;
        match &self.repr {
            BoundRepr::Spec(BoundSpec::Linear { c }) => c * kf,
            BoundRepr::Spec(BoundSpec::Affine { slope, intercept }) => slope * kf + intercept,
            BoundRepr::Spec(BoundSpec::Power { coef, exponent }) => coef * kf.powf(*exponent),
            BoundRepr::Spec(BoundSpec::Constant { value }) => *value,
            BoundRepr::Custom { eval, .. } => eval(k),
        }
    }

    /// Largest integer gap sum permitted at block `k`, i.e. `⌊p(k)⌋`
    /// (`None` when `p(k) < 0`).
    pub fn allowed(&self, k: u64) -> Option<u64> {
        let v = self.eval(k);
        if v.is_nan() || v < 0.0 {
            None
        } else if v >= u64::MAX as f64 {
            Some(u64::MAX)
        } else {
            Some(v.floor() as u64)
        }
    }

    /// Integer `⌈p(k)⌉`, used where the bound enters a radius exponent.
    pub fn ceil(&self, k: u64) -> u64 {
        self.eval(k).max(0.0).ceil() as u64
    }

    /// Samples `k = 1..=upto` and returns the first `k` with `p(k+1) < p(k)`
    /// or `p(k) ≤ 0`.
    pub fn check_monotone(&self, upto: u64) -> Option<u64> {
        let mut prev = self.eval(1);
        if prev.is_nan() || prev <= 0.0 {
            return Some(1);
        }
        for k in 2..=upto {
            let v = self.eval(k);
            if v.is_nan() || v < prev {
                return Some(k - 1);
            }
            prev = v;
        }
        None
    }

    /// A `K0` such that `c·p(k) ≥ d·k + off` for all `k ≥ K0`, when the
    /// bound's shape lets us prove it.
    fn dominates_from(&self, c: f64, d: f64, off: f64) -> Option<u64> {
        let linear = |slope: f64, intercept: f64| -> Option<u64> {
            // (slope·c − d)·k ≥ off − intercept·c
            let lead = slope * c - d;
            let rhs = off - intercept * c;
            if lead > 0.0 {
                Some(((rhs / lead).ceil().max(1.0)) as u64)
            } else if lead == 0.0 && rhs <= 0.0 {
                Some(1)
            } else {
                None
            }
        };
        match self.spec()? {
            BoundSpec::Linear { c: slope } => linear(*slope, 0.0),
            BoundSpec::Affine { slope, intercept } => linear(*slope, *intercept),
            BoundSpec::Constant { value } => linear(0.0, *value),
            BoundSpec::Power { coef, exponent } if *exponent == 1.0 => linear(*coef, 0.0),
            BoundSpec::Power { coef, exponent } if *exponent > 1.0 && *coef > 0.0 => {
                // h(k) = c·coef·k^e − d·k − off is increasing once
                // c·coef·e·k^{e−1} ≥ d, and stays nonnegative after its first root.
                let turn = (d / (c * coef * exponent))
                    .max(1.0)
                    .powf(1.0 / (exponent - 1.0));
                let mut k = turn.ceil().max(1.0) as u64;
                let h = |k: u64| c * coef * (k as f64).powf(*exponent) - d * k as f64 - off;
                while h(k) < 0.0 {
                    k = k.checked_mul(2)?;
                }
                Some(k)
            }
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Weight families f^L_r

/// Serializable weight families. Each evaluates `f^L_r(r_k)` from the block
/// length, the block index `k` and the starts `r_1..=r_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// `f ≡ value`
    Constant { value: f64 },
    /// `f(r_k) = k`
    BlockIndex,
    /// `f(r_k) = ln(k + offset)`, `offset > 0`
    LogBlockIndex { offset: f64 },
}

/// What a weight evaluator may look at: the partition up to the current block.
#[derive(Debug, Clone, Copy)]
pub struct WeightContext<'a> {
    pub block_len: usize,
    /// 1-based block index.
    pub block: usize,
    /// `r_1..=r_block`.
    pub starts: &'a [u64],
}

impl WeightContext<'_> {
    pub fn start(&self) -> u64 {
        self.starts[self.block - 1]
    }
}

type WeightEval = Arc<dyn Fn(&WeightContext<'_>) -> f64 + Send + Sync>;

/// A weight family together with its declared summability behaviour.
#[derive(Clone)]
pub struct WeightFamily {
    repr: WeightRepr,
}

#[derive(Clone)]
enum WeightRepr {
    Spec(WeightSpec),
    Custom {
        name: String,
        eval: WeightEval,
        diverges_on_linear_starts: bool,
    },
}

impl fmt::Debug for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            WeightRepr::Spec(s) => write!(f, "WeightFamily({s:?})"),
            WeightRepr::Custom { name, .. } => write!(f, "WeightFamily(custom {name})"),
        }
    }
}

impl PartialEq for WeightFamily {
    fn eq(&self, other: &Self) -> bool {
        match (&self.repr, &other.repr) {
            (WeightRepr::Spec(a), WeightRepr::Spec(b)) => a == b,
            (WeightRepr::Custom { eval: a, .. }, WeightRepr::Custom { eval: b, .. }) => {
                Arc::ptr_eq(a, b)
            }
            _ => false,
        }
    }
}

impl Serialize for WeightFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.repr {
            WeightRepr::Spec(spec) => spec.serialize(s),
            WeightRepr::Custom { name, .. } => Err(S::Error::custom(format!(
                "custom weight family `{name}` has no serialized form"
            ))),
        }
    }
}

impl<'de> Deserialize<'de> for WeightFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        WeightSpec::deserialize(d).map(WeightFamily::from)
    }
}

impl From<WeightSpec> for WeightFamily {
    fn from(spec: WeightSpec) -> Self {
        WeightFamily {
            repr: WeightRepr::Spec(spec),
        }
    }
}

/// Outcome of sampling the declared properties of a weight family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightPropertyReport {
    /// Values grew between the first and last sampled block.
    pub grows: bool,
    /// Sampled pairs violating `r_k ≤ r̃_k ⇒ f_r(r_k) ≤ f_r̃(r̃_k)`.
    pub order_violations: usize,
    pub samples: usize,
}

impl WeightFamily {
    pub fn constant(value: f64) -> Self {
        WeightSpec::Constant { value }.into()
    }

    pub fn block_index() -> Self {
        WeightSpec::BlockIndex.into()
    }

    /// A black-box family. `diverges_on_linear_starts` declares whether
    /// `Σ 1/(r_k f(r_k))` diverges whenever the starts grow linearly.
    pub fn custom(
        name: impl Into<String>,
        diverges_on_linear_starts: bool,
        eval: impl Fn(&WeightContext<'_>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        WeightFamily {
            repr: WeightRepr::Custom {
                name: name.into(),
                eval: Arc::new(eval),
                diverges_on_linear_starts,
            },
        }
    }

    pub fn eval(&self, ctx: &WeightContext<'_>) -> f64 {
        match &self.repr {
            WeightRepr::Spec(WeightSpec::Constant { value }) => *value,
            WeightRepr::Spec(WeightSpec::BlockIndex) => ctx.block as f64,
            WeightRepr::Spec(WeightSpec::LogBlockIndex { offset }) => {
                (ctx.block as f64 + offset).ln()
            }
            WeightRepr::Custom { eval, .. } => eval(ctx),
        }
    }

    /// Whether the weighted reciprocal sum diverges along linearly growing starts.
    pub fn diverges_on_linear_starts(&self) -> bool {
        match &self.repr {
            WeightRepr::Spec(WeightSpec::Constant { .. }) => true,
            WeightRepr::Spec(WeightSpec::LogBlockIndex { .. }) => true,
            WeightRepr::Spec(WeightSpec::BlockIndex) => false,
            WeightRepr::Custom {
                diverges_on_linear_starts,
                ..
            } => *diverges_on_linear_starts,
        }
    }

    /// An upper bound on `Σ_{k>K} 1/(r_k f(r_k))` valid for every partition
    /// (which always has `r_k ≥ k`), when one is known.
    pub fn tail_bound(&self, after: usize) -> Option<f64> {
        match &self.repr {
            // Σ_{k>K} 1/k² ≤ 1/K
            WeightRepr::Spec(WeightSpec::BlockIndex) if after > 0 => Some(1.0 / after as f64),
            _ => None,
        }
    }

    /// Samples pairs of partitions with `r ≤ r̃` pointwise and checks the
    /// monotonicity property; also checks growth between block 1 and `blocks`.
    pub fn check_properties(
        &self,
        block_len: usize,
        blocks: usize,
        samples: usize,
        seed: u64,
    ) -> WeightPropertyReport {
        use rand::Rng;
        let mut rng = crate::generators::stream_rng(seed, 0x5745_4947_4854);
        let mut violations = 0;
        let mut grows = true;
        for _ in 0..samples {
            let mut r = Vec::with_capacity(blocks);
            let mut rt = Vec::with_capacity(blocks);
            let (mut cur, mut shift) = (rng.gen_range(1..=block_len as u64), 0u64);
            for _ in 0..blocks {
                shift += rng.gen_range(0..=block_len as u64);
                r.push(cur);
                rt.push(cur + shift);
                cur += block_len as u64 + rng.gen_range(0..=2 * block_len as u64);
            }
            for k in 1..=blocks {
                let a = self.eval(&WeightContext {
                    block_len,
                    block: k,
                    starts: &r[..k],
                });
                let b = self.eval(&WeightContext {
                    block_len,
                    block: k,
                    starts: &rt[..k],
                });
                if a > b {
                    violations += 1;
                }
            }
            let first = self.eval(&WeightContext {
                block_len,
                block: 1,
                starts: &r[..1],
            });
            let last = self.eval(&WeightContext {
                block_len,
                block: blocks,
                starts: &r,
            });
            grows &= last > first;
        }
        WeightPropertyReport {
            grows,
            order_violations: violations,
            samples,
        }
    }
}

/// `Σ_{k ≤ count} 1/(r_k · f(r_k))` with outward rounding.
pub fn weighted_partial_sum(
    starts: &[u64],
    block_len: usize,
    weights: &WeightFamily,
    count: usize,
) -> Result<Interval> {
    if count > starts.len() {
        return Err(Error::InvalidArgument(format!(
            "count {count} exceeds the {} available starts",
            starts.len()
        )));
    }
    let mut acc = Interval::ZERO;
    for k in 1..=count {
        acc = acc + weighted_term(starts, block_len, weights, k)?;
    }
    Ok(acc)
}

pub(crate) fn weighted_term(
    starts: &[u64],
    block_len: usize,
    weights: &WeightFamily,
    k: usize,
) -> Result<Interval> {
    let f = weights.eval(&WeightContext {
        block_len,
        block: k,
        starts: &starts[..k],
    });
    if f.is_nan() || f <= 0.0 {
        return Err(Error::NonpositiveWeight { block: k, value: f });
    }
    let denom = Interval::around(f, 2).mul_nonneg(Interval::exact(starts[k - 1] as f64));
    Ok(denom.recip_of())
}

// ---------------------------------------------------------------------------
// Set descriptors and reports

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set", deny_unknown_fields)]
pub enum SetDescriptor {
    A {
        #[serde(rename = "L")]
        l: usize,
        #[serde(rename = "M")]
        m: u64,
    },
    B {
        #[serde(rename = "L")]
        l: usize,
        k: usize,
    },
    F {
        n: Symbol,
        #[serde(rename = "M")]
        m: u64,
    },
    NLc {
        #[serde(rename = "L")]
        l: usize,
        bound: BoundFunction,
    },
    NfWeighted {
        #[serde(rename = "L")]
        l: usize,
        #[serde(rename = "M")]
        m: u64,
        weights: WeightFamily,
    },
}

impl SetDescriptor {
    pub fn validate(&self, alphabet: Alphabet) -> Result<()> {
        match self {
            SetDescriptor::A { l, .. }
            | SetDescriptor::B { l, .. }
            | SetDescriptor::NLc { l, .. }
            | SetDescriptor::NfWeighted { l, .. } => check_block_len(*l, alphabet),
            SetDescriptor::F { n, .. } => alphabet.check(*n).map(|_| ()),
        }
    }

    /// `(1/L)·ln M` for `A{L, M}`.
    pub fn a_threshold(l: usize, m: u64) -> Interval {
        Interval::ln_ratio(m, l as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    NonMember,
    /// No extension of the given prefix lies in the set.
    ExcludedByPrefix,
    UndeterminedAtHorizon,
}

/// The finite computation behind a verdict.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub block_len: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub starts: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partial_sum: Option<Interval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eventual_gap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub missing_symbol: Option<Symbol>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occurrences: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violating_block: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    pub certificate: Certificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<Interval>,
}

impl ClassificationReport {
    fn new(verdict: Verdict, certificate: Certificate) -> Self {
        ClassificationReport {
            verdict,
            certificate,
            threshold: None,
        }
    }

    fn with_threshold(mut self, t: Interval) -> Self {
        self.threshold = Some(t);
        self
    }
}

// ---------------------------------------------------------------------------
// Quasi-normality

/// Decides quasi-normality of an eventually periodic sequence.
///
/// Such a sequence is quasi-normal exactly when every symbol occurs in its
/// period: then the greedy `L`-partition with `L = max(N, period length)` is
/// infinite with bounded gaps, so `Σ 1/r_k` diverges; otherwise some symbol
/// occurs finitely often and no infinite block partition exists.
pub fn is_quasi_normal(x: &SymbolicSequence) -> Result<ClassificationReport> {
    let (_, period) = x.parts().ok_or(Error::NotExact)?;
    let alphabet = x.alphabet();
    if let Some(missing) = alphabet.symbols().find(|s| !period.contains(s)) {
        return Ok(ClassificationReport::new(
            Verdict::NonMember,
            Certificate {
                missing_symbol: Some(missing),
                reason: format!(
                    "symbol {missing} does not occur in the period, so no infinite block partition exists"
                ),
                ..Default::default()
            },
        ));
    }
    let n = alphabet.size() as usize;
    for l in n..=n.max(period.len()) {
        let g = greedy_partition(x, l, 8)?;
        if let GreedyStatus::ProvenInfinite {
            eventual_gap,
            cycle,
        } = g.status
        {
            return Ok(ClassificationReport::new(
                Verdict::Member,
                Certificate {
                    block_len: Some(l),
                    starts: g.starts.clone(),
                    eventual_gap: Some(eventual_gap),
                    reason: format!(
                        "greedy {l}-partition is infinite; from block {} on consecutive starts differ by at most {eventual_gap}, \
                         so r_k grows at most linearly and Σ 1/r_k diverges",
                        cycle.first_block
                    ),
                    ..Default::default()
                },
            ));
        }
    }
    unreachable!("a window of period length always covers the alphabet")
}

/// Greedy starts, reciprocal partial sums and cumulative gap sums of a prefix
/// (or of the first `count` blocks of an exact sequence).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    #[serde(rename = "L")]
    pub block_len: usize,
    pub starts: Vec<u64>,
    pub partial_sums: Vec<Interval>,
    pub gap_sums: Vec<u64>,
}

impl Diagnostics {
    pub fn sum(&self) -> Interval {
        self.partial_sums.last().copied().unwrap_or(Interval::ZERO)
    }

    /// The exact rational value of the final partial sum.
    pub fn exact_sum(&self) -> BigRational {
        self.starts.iter().fold(BigRational::zero(), |acc, &r| {
            acc + BigRational::new(BigInt::from(1), BigInt::from(r))
        })
    }
}

/// Diagnostics only: never asserts divergence from a prefix.
pub fn quasi_normal_diagnostics(
    x: &SymbolicSequence,
    block_len: usize,
    count: usize,
) -> Result<Diagnostics> {
    let g = greedy_partition(x, block_len, count)?;
    let mut acc = Interval::ZERO;
    let partial_sums = g
        .starts
        .iter()
        .map(|&r| {
            acc = acc + Interval::recip(r);
            acc
        })
        .collect();
    let mut next_free = 1u64;
    let mut total = 0u64;
    let gap_sums = g
        .starts
        .iter()
        .map(|&r| {
            total += r - next_free;
            next_free = r + block_len as u64;
            total
        })
        .collect();
    Ok(Diagnostics {
        block_len,
        starts: g.starts,
        partial_sums,
        gap_sums,
    })
}

// ---------------------------------------------------------------------------
// Exclusions and memberships

/// Checks whether the greedy blocks lying wholly inside the prefix already
/// push `Σ 1/r_k` to `(1/L)·ln M`, which rules out every extension.
pub fn excluded_from_a(
    word: &[Symbol],
    alphabet: Alphabet,
    block_len: usize,
    m: u64,
) -> Result<ClassificationReport> {
    check_block_len(block_len, alphabet)?;
    if m == 0 {
        return Ok(ClassificationReport::new(
            Verdict::ExcludedByPrefix,
            Certificate {
                block_len: Some(block_len),
                reason: "A with M = 0 is empty".into(),
                ..Default::default()
            },
        ));
    }
    let threshold = SetDescriptor::a_threshold(block_len, m);
    let starts = greedy_starts_in_word(word, alphabet, block_len, usize::MAX);
    let sum = reciprocal_sum(starts.iter().copied());
    let excluded = sum.certainly_ge(threshold);
    let verdict = if excluded {
        Verdict::ExcludedByPrefix
    } else {
        Verdict::UndeterminedAtHorizon
    };
    let reason = if excluded {
        "greedy blocks inside the prefix already reach (1/L)·ln M; later blocks only add"
            .to_string()
    } else {
        "prefix blocks stay below (1/L)·ln M".to_string()
    };
    Ok(ClassificationReport::new(
        verdict,
        Certificate {
            block_len: Some(block_len),
            terms: Some(starts.len()),
            blocks: Some(starts.len()),
            starts,
            partial_sum: Some(sum),
            reason,
            ..Default::default()
        },
    )
    .with_threshold(threshold))
}

/// Convenience wrapper over [`excluded_from_a`] for sequences.
pub fn excluded_from_a_seq(
    x: &SymbolicSequence,
    block_len: usize,
    m: u64,
) -> Result<ClassificationReport> {
    let word = match x.model() {
        SeqModel::FinitePrefix { prefix } => prefix.clone(),
        SeqModel::EventuallyPeriodic { .. } => {
            return Err(Error::InvalidArgument(
                "prefix exclusion expects a finite prefix".into(),
            ))
        }
    };
    excluded_from_a(&word, x.alphabet(), block_len, m)
}

/// Membership verdict; exact for eventually periodic input.
pub fn membership(
    x: &SymbolicSequence,
    set: &SetDescriptor,
    limits: &Limits,
) -> Result<ClassificationReport> {
    set.validate(x.alphabet())?;
    match set {
        SetDescriptor::A { l, m } => membership_a(x, *l, *m, limits),
        SetDescriptor::B { l, k } => membership_b(x, *l, *k),
        SetDescriptor::F { n, m } => membership_f(x, *n, *m),
        SetDescriptor::NLc { l, bound } => {
            let report = satisfies_p_lc(x, *l, bound, limits.search_blocks)?;
            if report.verdict == Verdict::UndeterminedAtHorizon {
                return Err(Error::UndecidableAtHorizon(report.certificate.reason));
            }
            Ok(report)
        }
        SetDescriptor::NfWeighted { l, m, weights } => {
            membership_weighted(x, *l, *m, weights, limits)
        }
    }
}

fn membership_a(
    x: &SymbolicSequence,
    l: usize,
    m: u64,
    limits: &Limits,
) -> Result<ClassificationReport> {
    if let SeqModel::FinitePrefix { prefix } = x.model() {
        let report = excluded_from_a(prefix, x.alphabet(), l, m)?;
        if report.verdict == Verdict::ExcludedByPrefix {
            return Ok(report);
        }
        return Err(Error::UndecidableAtHorizon(
            "membership in A depends on the tail of the prefix".into(),
        ));
    }
    let threshold = if m == 0 {
        Interval::exact(f64::NEG_INFINITY)
    } else {
        SetDescriptor::a_threshold(l, m)
    };
    let g = greedy_partition(x, l, 0)?;
    match g.status {
        GreedyStatus::ExistsUpToBlock { k } => Ok(ClassificationReport::new(
            Verdict::NonMember,
            Certificate {
                block_len: Some(l),
                blocks: Some(k),
                reason: format!(
                    "greedy {l}-partition stops after {k} blocks, so it does not exist"
                ),
                ..Default::default()
            },
        )
        .with_threshold(threshold)),
        GreedyStatus::ProvenInfinite { eventual_gap, .. } => {
            // Linear growth already gives divergence; also find the crossing term.
            let mut sum = Interval::ZERO;
            let mut crossed = None;
            if m == 0 {
                crossed = Some(0);
            } else {
                for (i, r) in g.iter_starts().take(limits.summation_terms).enumerate() {
                    sum = sum + Interval::recip(r);
                    if sum.certainly_ge(threshold) {
                        crossed = Some(i + 1);
                        break;
                    }
                }
            }
            let reason = match crossed {
                Some(t) => format!(
                    "starts grow linearly (eventual gap ≤ {eventual_gap}) so Σ 1/r_k diverges; \
                     the partial sum already reaches (1/L)·ln M after {t} terms"
                ),
                None => format!(
                    "starts grow linearly (eventual gap ≤ {eventual_gap}) so Σ 1/r_k diverges; \
                     threshold not yet crossed within {} summed terms",
                    limits.summation_terms
                ),
            };
            Ok(ClassificationReport::new(
                Verdict::NonMember,
                Certificate {
                    block_len: Some(l),
                    eventual_gap: Some(eventual_gap),
                    partial_sum: Some(sum),
                    terms: crossed,
                    reason,
                    ..Default::default()
                },
            )
            .with_threshold(threshold))
        }
        GreedyStatus::UndeterminedBeyondHorizon { .. } => unreachable!("exact input"),
    }
}

fn membership_b(x: &SymbolicSequence, l: usize, k: usize) -> Result<ClassificationReport> {
    let g = greedy_partition(x, l, k + 1)?;
    let cert = |blocks: usize, reason: String| Certificate {
        block_len: Some(l),
        starts: g.starts.clone(),
        blocks: Some(blocks),
        reason,
        ..Default::default()
    };
    match g.status {
        GreedyStatus::ExistsUpToBlock { k: found } => {
            let verdict = if found <= k {
                Verdict::Member
            } else {
                Verdict::NonMember
            };
            Ok(ClassificationReport::new(
                verdict,
                cert(
                    found,
                    format!("greedy {l}-partition has exactly {found} blocks"),
                ),
            ))
        }
        GreedyStatus::ProvenInfinite { .. } => Ok(ClassificationReport::new(
            Verdict::NonMember,
            cert(g.starts.len(), format!("greedy {l}-partition is infinite")),
        )),
        GreedyStatus::UndeterminedBeyondHorizon { horizon } => {
            if g.starts.len() > k {
                Ok(ClassificationReport::new(
                    Verdict::ExcludedByPrefix,
                    cert(
                        g.starts.len(),
                        format!("greedy blocks 1..={} lie inside the prefix", k + 1),
                    ),
                ))
            } else {
                Err(Error::UndecidableAtHorizon(format!(
                    "only {} greedy blocks within horizon {horizon}",
                    g.starts.len()
                )))
            }
        }
    }
}

fn membership_f(x: &SymbolicSequence, n: Symbol, m: u64) -> Result<ClassificationReport> {
    if m == 0 {
        return Ok(ClassificationReport::new(
            if x.is_exact() {
                Verdict::NonMember
            } else {
                Verdict::ExcludedByPrefix
            },
            Certificate {
                reason: "F with M = 0 is empty".into(),
                ..Default::default()
            },
        ));
    }
    match x.model() {
        SeqModel::EventuallyPeriodic { transient, period } => {
            if period.contains(&n) {
                return Ok(ClassificationReport::new(
                    Verdict::NonMember,
                    Certificate {
                        reason: format!("symbol {n} occurs in the period, hence infinitely often"),
                        ..Default::default()
                    },
                ));
            }
            let count = transient.iter().filter(|&&s| s == n).count() as u64;
            let verdict = if count < m {
                Verdict::Member
            } else {
                Verdict::NonMember
            };
            Ok(ClassificationReport::new(
                verdict,
                Certificate {
                    occurrences: Some(count),
                    reason: format!("symbol {n} occurs exactly {count} times"),
                    ..Default::default()
                },
            ))
        }
        SeqModel::FinitePrefix { prefix } => {
            let count = prefix.iter().filter(|&&s| s == n).count() as u64;
            if count >= m {
                Ok(ClassificationReport::new(
                    Verdict::ExcludedByPrefix,
                    Certificate {
                        occurrences: Some(count),
                        reason: format!("prefix already holds {count} ≥ {m} occurrences of {n}"),
                        ..Default::default()
                    },
                ))
            } else {
                Err(Error::UndecidableAtHorizon(format!(
                    "only {count} occurrences of {n} within the prefix"
                )))
            }
        }
    }
}

fn membership_weighted(
    x: &SymbolicSequence,
    l: usize,
    m: u64,
    weights: &WeightFamily,
    limits: &Limits,
) -> Result<ClassificationReport> {
    let target = Interval::exact(m as f64);
    let g = greedy_partition(x, l, 0)?;
    let mut starts = Vec::new();
    let mut sum = Interval::ZERO;
    let cert = |sum: Interval, starts: &[u64], reason: String| Certificate {
        block_len: Some(l),
        partial_sum: Some(sum),
        terms: Some(starts.len()),
        reason,
        ..Default::default()
    };
    match g.status {
        GreedyStatus::ExistsUpToBlock { k } => Ok(ClassificationReport::new(
            Verdict::NonMember,
            Certificate {
                block_len: Some(l),
                blocks: Some(k),
                reason: format!("greedy {l}-partition stops after {k} blocks"),
                ..Default::default()
            },
        )),
        GreedyStatus::UndeterminedBeyondHorizon { horizon } => {
            let g = greedy_partition(x, l, usize::MAX)?;
            let sum = weighted_partial_sum(&g.starts, l, weights, g.starts.len())?;
            if sum.certainly_ge(target) {
                Ok(ClassificationReport::new(
                    Verdict::ExcludedByPrefix,
                    cert(
                        sum,
                        &g.starts,
                        "weighted sum over prefix blocks reaches M".into(),
                    ),
                )
                .with_threshold(target))
            } else {
                Err(Error::UndecidableAtHorizon(format!(
                    "weighted sum within horizon {horizon} stays below M"
                )))
            }
        }
        GreedyStatus::ProvenInfinite { .. } => {
            let mut checkpoint = 64usize;
            for r in g.iter_starts().take(limits.summation_terms) {
                starts.push(r);
                let k = starts.len();
                sum = sum + weighted_term(&starts, l, weights, k)?;
                if sum.certainly_ge(target) {
                    return Ok(ClassificationReport::new(
                        Verdict::NonMember,
                        cert(
                            sum,
                            &starts,
                            format!("weighted sum reaches M after {k} blocks"),
                        ),
                    )
                    .with_threshold(target));
                }
                if k == checkpoint {
                    checkpoint *= 2;
                    if let Some(tail) = weights.tail_bound(k) {
                        if (sum + Interval::around(tail, 1)).certainly_lt(target) {
                            return Ok(ClassificationReport::new(
                                Verdict::Member,
                                cert(
                                    sum,
                                    &starts,
                                    format!("weighted sum after {k} blocks plus tail bound {tail:.3e} stays below M"),
                                ),
                            )
                            .with_threshold(target));
                        }
                    }
                }
            }
            if weights.diverges_on_linear_starts() {
                Ok(ClassificationReport::new(
                    Verdict::NonMember,
                    cert(
                        sum,
                        &starts,
                        "starts grow linearly and the family diverges along linear starts".into(),
                    ),
                )
                .with_threshold(target))
            } else {
                Err(Error::UndecidableAtHorizon(
                    "weighted sum neither crossed M nor admitted a tail bound".into(),
                ))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Bounded-gap representations

/// Decides (exact input) or bounds (prefix input) the predicate "some
/// representation `S_1 R_1 S_2 R_2 …` with blocks of length `L` covering the
/// alphabet has `Σ_{i≤k} |S_i| ≤ p(k)` for all `k`".
///
/// The greedy partition is pointwise minimal among all valid partitions and
/// the constraint is an upper bound on each start, so it suffices to test the
/// greedy starts.
pub fn satisfies_p_lc(
    x: &SymbolicSequence,
    block_len: usize,
    bound: &BoundFunction,
    search_cap: usize,
) -> Result<ClassificationReport> {
    let l = block_len as u64;
    let gap_sum = |k: usize, r: u64| r - 1 - (k as u64 - 1) * l;
    let violates = |k: usize, r: u64| match bound.allowed(k as u64) {
        Some(a) => gap_sum(k, r) > a,
        None => true,
    };
    let reject = |k: usize, r: u64, verdict: Verdict| {
        ClassificationReport::new(
            verdict,
            Certificate {
                block_len: Some(block_len),
                violating_block: Some(k),
                starts: vec![r],
                reason: format!(
                    "greedy block {k} starts at {r}, so every representation has Σ|S_i| ≥ {} > p({k}) = {}",
                    gap_sum(k, r),
                    bound.eval(k as u64)
                ),
                ..Default::default()
            },
        )
    };
    let g = greedy_partition(x, block_len, 0)?;
    match g.status {
        GreedyStatus::ExistsUpToBlock { k } => {
            if let Some((i, r)) = g
                .iter_starts()
                .enumerate()
                .find(|&(i, r)| violates(i + 1, r))
            {
                return Ok(reject(i + 1, r, Verdict::NonMember));
            }
            Ok(ClassificationReport::new(
                Verdict::NonMember,
                Certificate {
                    block_len: Some(block_len),
                    blocks: Some(k),
                    reason: format!("only {k} blocks exist; no infinite representation"),
                    ..Default::default()
                },
            ))
        }
        GreedyStatus::UndeterminedBeyondHorizon { horizon } => {
            let starts = greedy_partition(x, block_len, usize::MAX)?.starts;
            if let Some((i, &r)) = starts
                .iter()
                .enumerate()
                .find(|&(i, &r)| violates(i + 1, r))
            {
                return Ok(reject(i + 1, r, Verdict::ExcludedByPrefix));
            }
            // The next block must start by 1 + kL + p(k+1); if that whole window
            // range is inside the prefix and greedy found nothing, no extension works.
            let k = starts.len() as u64;
            if let Some(a) = bound.allowed(k + 1) {
                let deadline = 1 + k * l + a;
                if deadline + l - 1 <= horizon as u64 {
                    return Ok(ClassificationReport::new(
                        Verdict::ExcludedByPrefix,
                        Certificate {
                            block_len: Some(block_len),
                            blocks: Some(k as usize),
                            violating_block: Some(k as usize + 1),
                            reason: format!(
                                "block {} would have to start by {deadline} but no admissible window exists inside the prefix",
                                k + 1
                            ),
                            ..Default::default()
                        },
                    ));
                }
            }
            Ok(ClassificationReport::new(
                Verdict::UndeterminedAtHorizon,
                Certificate {
                    block_len: Some(block_len),
                    starts,
                    reason: format!(
                        "every greedy block within horizon {horizon} respects the bound"
                    ),
                    ..Default::default()
                },
            ))
        }
        GreedyStatus::ProvenInfinite { cycle, .. } => {
            let head_len = cycle.first_block + cycle.blocks - 1;
            for k in 1..=head_len {
                let r = g.start(k).expect("infinite");
                if violates(k, r) {
                    return Ok(reject(k, r, Verdict::NonMember));
                }
            }
            let c = cycle.blocks as u64;
            let d = cycle.shift - c * l; // gap growth per cycle
            let member = |reason: String| {
                ClassificationReport::new(
                    Verdict::Member,
                    Certificate {
                        block_len: Some(block_len),
                        starts: (1..=head_len).filter_map(|k| g.start(k)).collect(),
                        reason,
                        ..Default::default()
                    },
                )
            };
            if d == 0 {
                // Gap sums repeat with the cycle while p only grows.
                return Ok(member(
                    "gap sums are eventually periodic and the bound is nondecreasing".into(),
                ));
            }
            // c·G(k) ≤ d·k + off for all k ≥ first_block
            let off = (cycle.first_block..cycle.first_block + cycle.blocks)
                .map(|k| c as f64 * gap_sum(k, g.start(k).unwrap()) as f64 - d as f64 * k as f64)
                .fold(f64::NEG_INFINITY, f64::max);
            let from = bound.dominates_from(c as f64, d as f64, off);
            let scan_to = from.map_or(search_cap, |k0| (k0 as usize).max(head_len));
            if scan_to > search_cap && from.is_some() {
                return Err(Error::CapExceeded {
                    what: "gap-bound search",
                    requested: scan_to as u128,
                    cap: search_cap as u128,
                });
            }
            for k in head_len + 1..=scan_to {
                let r = g.start(k).expect("infinite");
                if violates(k, r) {
                    return Ok(reject(k, r, Verdict::NonMember));
                }
            }
            match from {
                Some(k0) => Ok(member(format!(
                    "gap sums grow by {d} per {c} blocks; the bound dominates from block {k0} and holds before it"
                ))),
                None => Err(Error::CapExceeded {
                    what: "gap-bound search",
                    requested: u128::MAX,
                    cap: search_cap as u128,
                }),
            }
        }
    }
}

/// Result of the exhaustive representation search on a finite word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RepresentationSearch {
    /// Every representation violates the bound within the word, whatever follows.
    Infeasible,
    /// Some choice of blocks survives to the end of the word; the starts are given.
    Escapes { starts: Vec<u64> },
}

/// Exhausts all block representations of `word` (blocks of length `L`
/// covering the alphabet, `r_k ≤ 1 + (k−1)L + ⌊p(k)⌋`). A representation
/// escapes once its next block may start at or beyond the last position where
/// a block still fits inside the word, since later entries are unknown.
///
/// This deliberately ignores the greedy partition and serves as an
/// independent check of greedy-based reasoning.
pub fn representation_search(
    word: &[Symbol],
    alphabet: Alphabet,
    block_len: usize,
    bound: &BoundFunction,
) -> Result<RepresentationSearch> {
    check_block_len(block_len, alphabet)?;
    let l = block_len as u64;
    let len = word.len() as u64;
    let valid: Vec<bool> = (0..word.len())
        .map(|r| r + block_len <= word.len() && covers(&word[r..r + block_len], alphabet))
        .collect();

    // feasible(k, from): can blocks k, k+1, … be placed with block k starting ≥ from?
    fn search(
        k: u64,
        from: u64,
        ctx: &(u64, u64, &[bool], &BoundFunction),
        memo: &mut HashMap<(u64, u64), Option<Vec<u64>>>,
    ) -> Option<Vec<u64>> {
        let (l, len, valid, bound) = *ctx;
        if let Some(hit) = memo.get(&(k, from)) {
            return hit.clone();
        }
        let result = (|| {
            let deadline = 1 + (k - 1) * l + bound.allowed(k)?;
            let mut r = from;
            while r <= deadline {
                if r + l - 1 > len {
                    // block would run past the known entries
                    return Some(vec![r]);
                }
                if valid[(r - 1) as usize] {
                    if let Some(mut rest) = search(k + 1, r + l, ctx, memo) {
                        rest.insert(0, r);
                        return Some(rest);
                    }
                }
                r += 1;
            }
            None
        })();
        memo.insert((k, from), result.clone());
        result
    }

    let mut memo = HashMap::new();
    Ok(match search(1, 1, &(l, len, &valid, bound), &mut memo) {
        Some(starts) => RepresentationSearch::Escapes { starts },
        None => RepresentationSearch::Infeasible,
    })
}

// ---------------------------------------------------------------------------
// Divergence certificates

/// Step function `f(r_k) = l` on level blocks `[k_l, k_{l+1})` with each
/// level's unweighted block sum at least `l`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceCertificate {
    /// `k_1 = 1, k_2, …, k_{levels+1}` (1-based block indices).
    pub level_starts: Vec<usize>,
    /// `Σ_{k_l ≤ k < k_{l+1}} 1/(r_k · l)` per level; each is `≥ 1`.
    pub weighted_level_sums: Vec<Interval>,
}

impl DivergenceCertificate {
    /// The step value `f(r_k)` for block `k`, if `k` lies in a built level.
    pub fn level_of(&self, k: usize) -> Option<usize> {
        self.level_starts
            .windows(2)
            .position(|w| w[0] <= k && k < w[1])
            .map(|i| i + 1)
    }
}

/// Builds the level sequence `k_1 = 1` and minimal `k_{l+1}` with
/// `Σ_{k=k_l}^{k_{l+1}−1} 1/r_k ≥ l` for `l = 1..=target_levels`.
pub fn build_divergence_certificate<I: IntoIterator<Item = u64>>(
    starts: I,
    target_levels: usize,
    term_cap: usize,
) -> Result<DivergenceCertificate> {
    let mut it = starts.into_iter();
    let mut level_starts = vec![1usize];
    let mut weighted = Vec::with_capacity(target_levels);
    let mut k = 1usize;
    for level in 1..=target_levels {
        let goal = Interval::exact(level as f64);
        let mut terms: Vec<u64> = Vec::new();
        let mut sum = Interval::ZERO;
        loop {
            if k > term_cap {
                return Err(Error::DivergenceTooSlow {
                    level,
                    cap: term_cap,
                });
            }
            let Some(r) = it.next() else {
                return Err(Error::DivergenceTooSlow { level, cap: k - 1 });
            };
            terms.push(r);
            k += 1;
            sum = sum + Interval::recip(r);
            let reached = if sum.certainly_ge(goal) {
                true
            } else if sum.contains(level as f64) {
                // too close to call in floating point
                let exact = terms.iter().fold(BigRational::zero(), |acc, &r| {
                    acc + BigRational::new(BigInt::from(1), BigInt::from(r))
                });
                exact >= BigRational::from_integer(BigInt::from(level))
            } else {
                false
            };
            if reached {
                break;
            }
        }
        level_starts.push(k);
        weighted.push(sum.div_scalar(level as f64));
    }
    Ok(DivergenceCertificate {
        level_starts,
        weighted_level_sums: weighted,
    })
}

/// Ratio helper for tests and reports: a `BigRational` as `f64`.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Gap lengths of the greedy decomposition of an exact sequence's first blocks.
pub fn greedy_gaps(x: &SymbolicSequence, partition: &GreedyPartition) -> Result<Vec<u64>> {
    Ok(decompose(x, &partition.starts, partition.block_len)?.gaps)
}
