//! Seeded factories for order sequences of every class the library studies,
//! plus the Monte-Carlo rate tables built from them.
//!
//! All randomness comes from SplitMix64 (64-bit state). A stream is selected
//! by [`stream_rng`], so trial `t` of an experiment draws from its own
//! generator and the output does not depend on scheduling.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::classify::{
    excluded_from_a, quasi_normal_diagnostics, BoundFunction, BoundSpec, Diagnostics, Verdict,
};
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, Execution};
use crate::partition::quasi_period;
use crate::seqspace::{Alphabet, SeqModel, Symbol, SymbolicSequence};

/// Identifier of the generator algorithm, recorded in experiment summaries.
pub const RNG_ALGORITHM: &str = "splitmix64";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// A SplitMix64 generator for `(seed, stream)`. The stream index is mixed
/// through one SplitMix64 output step before being combined with the seed.
pub fn stream_rng(seed: u64, stream: u64) -> SplitMix64 {
    let mut mixer = SplitMix64::seed_from_u64(stream.wrapping_mul(GOLDEN_GAMMA));
    SplitMix64::seed_from_u64(seed ^ mixer.next_u64())
}

/// Seed for trial `t` of an experiment seeded with `seed`.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    stream_rng(seed, t).next_u64()
}

/// How run lengths grow in [`GeneratorSpec::AdversarialRuns`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RunGrowth {
    /// Run `k` (from 0) has length `base^k`.
    Exponential { base: u64 },
    /// Run `k` (from 0) has length `step·(k+1)`.
    Linear { step: u64 },
}

impl RunGrowth {
    pub fn run_length(&self, k: u32) -> u64 {
        match *self {
            RunGrowth::Exponential { base } => base.saturating_pow(k),
            RunGrowth::Linear { step } => step.saturating_mul(k as u64 + 1),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            RunGrowth::Exponential { base } if base < 2 => Err(Error::InfeasibleSpec(
                "exponential run growth needs base ≥ 2".into(),
            )),
            RunGrowth::Linear { step: 0 } => Err(Error::InfeasibleSpec(
                "linear run growth needs step ≥ 1".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// `pattern` repeated forever.
    Periodic { pattern: Vec<Symbol> },
    /// A random period whose cyclic windows of length `m` all cover the alphabet.
    QuasiPeriodic { m: usize, seed: u64 },
    /// Independent uniform symbols.
    IidUniform { seed: u64, length: usize },
    /// Symbols `1, 2, …, N, 1, …` in runs of increasing length.
    AdversarialRuns { growth: RunGrowth, length: usize },
    /// Random blocks covering the alphabet separated by gaps whose cumulative
    /// length stays within `bound`.
    PcBounded {
        #[serde(rename = "L")]
        block_len: usize,
        bound: BoundSpec,
        seed: u64,
        length: usize,
    },
}

impl GeneratorSpec {
    pub fn seed(&self) -> Option<u64> {
        match *self {
            GeneratorSpec::QuasiPeriodic { seed, .. }
            | GeneratorSpec::IidUniform { seed, .. }
            | GeneratorSpec::PcBounded { seed, .. } => Some(seed),
            _ => None,
        }
    }

    /// The same spec with its seed replaced (no-op for deterministic variants).
    pub fn with_seed(&self, new_seed: u64) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            GeneratorSpec::QuasiPeriodic { seed, .. }
            | GeneratorSpec::IidUniform { seed, .. }
            | GeneratorSpec::PcBounded { seed, .. } => *seed = new_seed,
            _ => {}
        }
        spec
    }
}

/// Instantiates a spec over `alphabet`.
pub fn generate(spec: &GeneratorSpec, alphabet: Alphabet) -> Result<SymbolicSequence> {
    let n = alphabet.size();
    match spec {
        GeneratorSpec::Periodic { pattern } => {
            SymbolicSequence::periodic(alphabet, pattern.clone()).map_err(infeasible)
        }
        GeneratorSpec::QuasiPeriodic { m, seed } => quasi_periodic(alphabet, *m, *seed),
        GeneratorSpec::IidUniform { seed, length } => {
            let mut rng = stream_rng(*seed, 0);
            let prefix = (0..*length).map(|_| rng.gen_range(1..=n)).collect();
            SymbolicSequence::finite_prefix(alphabet, prefix)
        }
        GeneratorSpec::AdversarialRuns { growth, length } => {
            growth.validate()?;
            let mut prefix = Vec::with_capacity(*length);
            let mut k = 0u32;
            while prefix.len() < *length {
                let sym = k % n + 1;
                let run = growth.run_length(k).min((*length - prefix.len()) as u64) as usize;
                prefix.extend(std::iter::repeat_n(sym, run));
                k += 1;
            }
            SymbolicSequence::finite_prefix(alphabet, prefix)
        }
        GeneratorSpec::PcBounded {
            block_len,
            bound,
            seed,
            length,
        } => pc_bounded(alphabet, *block_len, &bound.clone().into(), *seed, *length),
    }
}

fn infeasible(e: Error) -> Error {
    Error::InfeasibleSpec(e.to_string())
}

/// Number of random periods tried before falling back to a permutation.
const QUASI_PERIODIC_ATTEMPTS: usize = 256;

fn quasi_periodic(alphabet: Alphabet, m: usize, seed: u64) -> Result<SymbolicSequence> {
    let n = alphabet.size() as usize;
    if m < n {
        return Err(Error::InfeasibleSpec(format!(
            "quasi-period m = {m} is smaller than the alphabet size {n}"
        )));
    }
    let mut rng = stream_rng(seed, 0);
    for _ in 0..QUASI_PERIODIC_ATTEMPTS {
        let len = rng.gen_range(m..=2 * m);
        let period = windowed_word(alphabet, m, len, &mut rng);
        let x = SymbolicSequence::periodic(alphabet, period)?;
        if quasi_period(&x)?.quasi_period.is_some_and(|q| q <= m) {
            return Ok(x);
        }
    }
    // A permutation repeated has quasi-period N ≤ m.
    let mut perm: Vec<Symbol> = alphabet.symbols().collect();
    perm.shuffle(&mut rng);
    SymbolicSequence::periodic(alphabet, perm)
}

/// A random word of length `len` in which every window of length `m` covers
/// the alphabet. Each symbol has a deadline by which it must reappear; a
/// random choice is kept only if the remaining deadlines stay schedulable,
/// otherwise the most urgent symbol is emitted.
fn windowed_word(alphabet: Alphabet, m: usize, len: usize, rng: &mut impl Rng) -> Vec<Symbol> {
    let n = alphabet.size() as usize;
    // deadline[s]: latest 0-based position at which symbol s+1 must occur
    let mut deadline: Vec<usize> = vec![m - 1; n];
    let schedulable = |deadline: &[usize], pos: usize| {
        let mut d = deadline.to_vec();
        d.sort_unstable();
        d.iter().enumerate().all(|(i, &dl)| dl >= pos + i)
    };
    let mut word = Vec::with_capacity(len);
    for pos in 0..len {
        let pick = rng.gen_range(0..n);
        let mut trial = deadline.clone();
        trial[pick] = pos + m;
        let chosen = if schedulable(&trial, pos + 1) {
            pick
        } else {
            (0..n)
                .min_by_key(|&s| deadline[s])
                .expect("nonempty alphabet")
        };
        deadline[chosen] = pos + m;
        word.push(chosen as Symbol + 1);
    }
    word
}

fn pc_bounded(
    alphabet: Alphabet,
    block_len: usize,
    bound: &BoundFunction,
    seed: u64,
    length: usize,
) -> Result<SymbolicSequence> {
    let n = alphabet.size();
    if block_len < n as usize {
        return Err(Error::InfeasibleSpec(format!(
            "block length {block_len} cannot cover an alphabet of size {n}"
        )));
    }
    // Blocks k = 1..=length/L at most fit into the prefix.
    let blocks = (length / block_len.max(1)) as u64 + 1;
    if let Some(k) = bound.check_monotone(blocks.max(2)) {
        return Err(Error::InfeasibleSpec(format!(
            "gap bound is not positive and nondecreasing (fails at k = {k})"
        )));
    }
    let mut rng = stream_rng(seed, 0);
    let mut word: Vec<Symbol> = Vec::with_capacity(length + block_len);
    let mut used = 0u64;
    let mut k = 1u64;
    while word.len() < length {
        let budget = bound.allowed(k).unwrap_or(0).saturating_sub(used);
        let gap = rng.gen_range(0..=budget.min(length as u64));
        used += gap;
        word.extend((0..gap).map(|_| rng.gen_range(1..=n)));
        let mut block: Vec<Symbol> = alphabet.symbols().collect();
        block.extend((n as usize..block_len).map(|_| rng.gen_range(1..=n)));
        block.shuffle(&mut rng);
        word.extend(block);
        k += 1;
    }
    word.truncate(length);
    SymbolicSequence::finite_prefix(alphabet, word)
}

// ---------------------------------------------------------------------------
// Rate tables

/// One generator family of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Family {
    pub id: String,
    pub generator: GeneratorSpec,
}

/// An experiment: families, the alphabet, the block length and the `M` of
/// the prefix exclusion test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub alphabet: Alphabet,
    #[serde(rename = "L")]
    pub block_len: usize,
    #[serde(rename = "M")]
    pub m: u64,
    pub families: Vec<Family>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub spec_id: String,
    pub trials: usize,
    pub bounded_density_rate: f64,
    #[serde(rename = "excluded_from_A_rate")]
    pub excluded_from_a_rate: f64,
}

/// Outcome of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub bounded_density: bool,
    pub excluded_from_a: bool,
}

/// Whether greedy blocks keep a bounded density over the second half of a
/// prefix of length `horizon`: at least one block starts there and the mean
/// gap `|S_k|` preceding those blocks is at most `2L`.
pub fn bounded_gap_density(diag: &Diagnostics, horizon: usize) -> bool {
    let half = (horizon / 2) as u64;
    let mut prev = 0u64;
    let (mut count, mut total) = (0u64, 0u64);
    for (&r, &g) in diag.starts.iter().zip(&diag.gap_sums) {
        if r > half {
            count += 1;
            total += g - prev;
        }
        prev = g;
    }
    count > 0 && total <= 2 * diag.block_len as u64 * count
}

/// Runs one trial on a prefix of length `horizon`.
pub fn run_trial(
    spec: &GeneratorSpec,
    alphabet: Alphabet,
    horizon: usize,
    block_len: usize,
    m: u64,
) -> Result<TrialOutcome> {
    let x = generate(spec, alphabet)?;
    let prefix = match x.model() {
        SeqModel::FinitePrefix { prefix } if prefix.len() >= horizon => prefix[..horizon].to_vec(),
        SeqModel::FinitePrefix { prefix } => {
            return Err(Error::PrefixTooShort {
                needed: horizon,
                available: prefix.len(),
            })
        }
        SeqModel::EventuallyPeriodic { .. } => x.prefix(horizon)?,
    };
    let word = SymbolicSequence::finite_prefix(alphabet, prefix)?;
    let diag = quasi_normal_diagnostics(&word, block_len, usize::MAX)?;
    let excluded = excluded_from_a(word_entries(&word), alphabet, block_len, m)?;
    Ok(TrialOutcome {
        bounded_density: bounded_gap_density(&diag, horizon),
        excluded_from_a: excluded.verdict == Verdict::ExcludedByPrefix,
    })
}

fn word_entries(x: &SymbolicSequence) -> &[Symbol] {
    match x.model() {
        SeqModel::FinitePrefix { prefix } => prefix,
        SeqModel::EventuallyPeriodic { .. } => &[],
    }
}

/// Prefix lengths generated specs must reach: random prefix variants are
/// stretched to `horizon` so the caller need not match lengths by hand.
fn at_horizon(spec: &GeneratorSpec, horizon: usize) -> GeneratorSpec {
    let mut spec = spec.clone();
    match &mut spec {
        GeneratorSpec::IidUniform { length, .. }
        | GeneratorSpec::AdversarialRuns { length, .. }
        | GeneratorSpec::PcBounded { length, .. } => *length = horizon,
        _ => {}
    }
    spec
}

/// Rates over `trials` independent trials of one family. Trial `t` reseeds
/// the spec with [`trial_seed`]`(seed, t)`.
pub fn empirical_class_rates(
    family: &Family,
    alphabet: Alphabet,
    trials: usize,
    horizon: usize,
    block_len: usize,
    m: u64,
    exec: Execution,
) -> Result<RateRow> {
    let spec = at_horizon(&family.generator, horizon);
    let base = spec.seed().unwrap_or(0);
    let outcomes = map_indexed(exec, trials, |t| {
        let s = spec.with_seed(trial_seed(base, t as u64));
        run_trial(&s, alphabet, horizon, block_len, m)
    });
    let outcomes: Vec<TrialOutcome> = outcomes.into_iter().collect::<Result<_>>()?;
    let rate = |f: fn(&TrialOutcome) -> bool| {
        if trials == 0 {
            0.0
        } else {
            outcomes.iter().filter(|o| f(o)).count() as f64 / trials as f64
        }
    };
    Ok(RateRow {
        spec_id: family.id.clone(),
        trials,
        bounded_density_rate: rate(|o| o.bounded_density),
        excluded_from_a_rate: rate(|o| o.excluded_from_a),
    })
}
