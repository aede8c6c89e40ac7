//! The porosity gauge `φ` and the witness constructions that exhibit holes
//! in the sets `A`, `B`, `F`, `N_{L,c}` and weighted `A`.
//!
//! A witness is a center `y` close to a base point `x` together with a
//! dyadic radius such that the ball around `y` misses the set. Because balls
//! are exactly prefix cylinders, emptiness of the ball follows from the
//! forced prefix alone, which [`verify_certificate`] checks either by
//! replaying the structural argument or by enumerating ball prefixes and
//! classifying each one.
//!
//! `φ⁻¹(t) = t^{1/t}` underflows `f64` for `t` below about `0.0014`, so the
//! gauge is also exposed in the log domain.

use serde::{Deserialize, Serialize};

use crate::classify::{
    excluded_from_a, membership, representation_search, satisfies_p_lc, weighted_partial_sum,
    weighted_term, BoundFunction, RepresentationSearch, SetDescriptor, Verdict, WeightFamily,
};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::parallel::{find_first_failure, Execution};
use crate::partition::{covers, greedy_starts_in_word};
use crate::seqspace::{enumerate_ball_prefixes, Alphabet, DyadicRadius, Symbol, SymbolicSequence};

// ---------------------------------------------------------------------------
// Gauge

/// Maximum bisection steps for [`phi`].
pub const PHI_MAX_ITERATIONS: usize = 200;

/// `ln φ⁻¹(t) = ln(t)/t` for `t ∈ (0, 1]`.
pub fn phi_inverse_ln(t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::DomainError(format!(
            "φ⁻¹ is defined on (0, 1], got {t}"
        )));
    }
    Ok(t.ln() / t)
}

/// `φ⁻¹(t) = t^{1/t}`; underflows to `0` for small `t`.
pub fn phi_inverse(t: f64) -> Result<f64> {
    if t == 1.0 {
        return Ok(1.0);
    }
    phi_inverse_ln(t).map(f64::exp)
}

/// `φ(s)` for `s ∈ (0, 1)`.
pub fn phi(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::DomainError(format!(
            "φ is defined on (0, 1), got {s}"
        )));
    }
    phi_from_ln(s.ln())
}

/// `φ(s)` given `ln s < 0`: bisection for `t` with `ln(t)/t = ln s` on
/// `[ε_mach, 1 − ε_mach]`.
pub fn phi_from_ln(ln_s: f64) -> Result<f64> {
    if ln_s.is_nan() || ln_s >= 0.0 {
        return Err(Error::DomainError(format!("φ needs ln s < 0, got {ln_s}")));
    }
    let g = |t: f64| t.ln() / t;
    let (mut lo, mut hi) = (f64::EPSILON, 1.0 - f64::EPSILON);
    if ln_s <= g(lo) {
        return Ok(lo);
    }
    if ln_s >= g(hi) {
        return Ok(hi);
    }
    for _ in 0..PHI_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < ln_s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick the endpoint whose image is closer
    Ok(if (g(lo) - ln_s).abs() <= (g(hi) - ln_s).abs() {
        lo
    } else {
        hi
    })
}

// ---------------------------------------------------------------------------
// Certificates

/// How emptiness of the ball is argued.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Argument {
    /// Every member of the ball shares the first `forced_len` entries of the
    /// witness, and those entries already exclude the set.
    PrefixForced { forced_len: usize, reason: String },
    /// Exhaustively classified `count` ball prefixes.
    Enumerated { count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub set: SetDescriptor,
    /// The entries `x_1..=x_j` of the base point that the witness keeps.
    pub base: Vec<Symbol>,
    /// `ε = 2^{-epsilon_exp}`; the witness agrees with the base on `1..=epsilon_exp`.
    pub epsilon_exp: u64,
    pub witness: SymbolicSequence,
    /// The ball `B(witness, 2^{-radius_exp})` misses the set.
    pub radius_exp: u64,
    pub argument: Argument,
}

impl WitnessCertificate {
    pub fn radius(&self) -> DyadicRadius {
        DyadicRadius(self.radius_exp)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.witness.alphabet()
    }
}

fn base_prefix(x: &SymbolicSequence, j: usize) -> Result<Vec<Symbol>> {
    match x.horizon() {
        Some(h) if h < j => Err(Error::PrefixTooShort {
            needed: j,
            available: h,
        }),
        _ => x.prefix(j),
    }
}

fn ascending(alphabet: Alphabet) -> Vec<Symbol> {
    alphabet.symbols().collect()
}

fn certificate(
    set: SetDescriptor,
    base: Vec<Symbol>,
    epsilon_exp: u64,
    witness: SymbolicSequence,
    radius_exp: u64,
    reason: String,
) -> WitnessCertificate {
    WitnessCertificate {
        set,
        base,
        epsilon_exp,
        witness,
        radius_exp,
        argument: Argument::PrefixForced {
            forced_len: radius_exp as usize,
            reason,
        },
    }
}

/// The exclusive lower bound on `epsilon_exp` for [`witness_a`]:
/// `2^{-e} < min{1/(8M), 2^{-3N-1}}` iff `e` exceeds it.
pub fn witness_a_min_exp(n: u32, m: u64) -> u64 {
    let by_n = 3 * n as u64 + 1;
    if m == 0 {
        return by_n;
    }
    // 2^e > 8M  iff  e > ⌊log₂(8M)⌋
    let by_m = (8u128 * m as u128).ilog2() as u64;
    by_n.max(by_m)
}

/// Hole in `A{N, M}` near `x` at scale `ε = 2^{-e}`:
/// `y = (x_1..x_e, 1×N, (1..N)^ω)` and radius `2^{-m}` with `m = e·2^e`,
/// which equals `φ⁻¹(ε)` exactly.
pub fn witness_a(
    x: &SymbolicSequence,
    m: u64,
    epsilon_exp: u64,
    limits: &Limits,
) -> Result<WitnessCertificate> {
    let alphabet = x.alphabet();
    let n = alphabet.size();
    let min = witness_a_min_exp(n, m);
    if epsilon_exp <= min {
        return Err(Error::EpsilonTooLarge {
            epsilon_exp,
            min_exp_exclusive: min,
        });
    }
    // m = ⌊-log₂(ε)/ε⌋ = e·2^e
    let radius = if epsilon_exp < 64 {
        (epsilon_exp as u128) << epsilon_exp
    } else {
        u128::MAX
    };
    if radius > limits.witness_horizon as u128 {
        return Err(Error::CapExceeded {
            what: "witness radius exponent",
            requested: radius,
            cap: limits.witness_horizon as u128,
        });
    }
    let j = epsilon_exp as usize;
    let base = base_prefix(x, j)?;
    let mut transient = base.clone();
    transient.extend(std::iter::repeat_n(1, n as usize));
    let y = SymbolicSequence::eventually_periodic(alphabet, transient, ascending(alphabet))?;
    Ok(certificate(
        SetDescriptor::A { l: n as usize, m },
        base,
        epsilon_exp,
        y,
        radius as u64,
        format!(
            "blocks 1..{n} start at {} and follow without gaps up to position {radius}; \
             their reciprocal sum exceeds (1/{n})·ln {m}",
            j + n as usize + 1
        ),
    ))
}

/// Hole in `B{N, k}`: the same center as [`witness_a`], radius
/// `2^{-(e + N + (k+1)N)}` pinning `k+1` full blocks after the run of ones.
pub fn witness_b(x: &SymbolicSequence, k: usize, epsilon_exp: u64) -> Result<WitnessCertificate> {
    if epsilon_exp == 0 {
        return Err(Error::EpsilonTooLarge {
            epsilon_exp,
            min_exp_exclusive: 0,
        });
    }
    let alphabet = x.alphabet();
    let n = alphabet.size() as usize;
    let j = epsilon_exp as usize;
    let base = base_prefix(x, j)?;
    let mut transient = base.clone();
    transient.extend(std::iter::repeat_n(1, n));
    let y = SymbolicSequence::eventually_periodic(alphabet, transient, ascending(alphabet))?;
    let forced = j + n + (k + 1) * n;
    Ok(certificate(
        SetDescriptor::B { l: n, k },
        base,
        epsilon_exp,
        y,
        forced as u64,
        format!(
            "{} disjoint blocks 1..{n} start at {}, so every greedy partition reaches block {}",
            k + 1,
            j + n + 1,
            k + 1
        ),
    ))
}

/// Hole in `F{n, M}`: `y = (x_1..x_e, n^ω)`, radius `2^{-(e+M+1)}`.
pub fn witness_f(
    x: &SymbolicSequence,
    symbol: Symbol,
    m: u64,
    epsilon_exp: u64,
) -> Result<WitnessCertificate> {
    if epsilon_exp == 0 {
        return Err(Error::EpsilonTooLarge {
            epsilon_exp,
            min_exp_exclusive: 0,
        });
    }
    let alphabet = x.alphabet();
    alphabet.check(symbol)?;
    let j = epsilon_exp as usize;
    let base = base_prefix(x, j)?;
    let y = SymbolicSequence::eventually_periodic(alphabet, base.clone(), vec![symbol])?;
    Ok(certificate(
        SetDescriptor::F { n: symbol, m },
        base,
        epsilon_exp,
        y,
        epsilon_exp + m + 1,
        format!(
            "positions {}..={} all hold {symbol}",
            j + 1,
            j as u64 + m + 1
        ),
    ))
}

/// `m = ⌈p(L⌊n/L⌋ + 1)⌉ + 2L + 2` for the `N_{L,c}` witness.
pub fn nlc_run_length(block_len: usize, bound: &BoundFunction, n: usize) -> u64 {
    let i_max = (block_len * (n / block_len) + 1) as u64;
    bound.ceil(i_max) + 2 * block_len as u64 + 2
}

/// Hole in `N_{L,c}`: `y = (x_1..x_n, 1^ω)` with `n = epsilon_exp`, radius
/// `2^{-(n+m)}`. Requires `N ≥ 2`, since a run of ones must not cover the
/// alphabet.
pub fn witness_nlc(
    x: &SymbolicSequence,
    block_len: usize,
    bound: &BoundFunction,
    epsilon_exp: u64,
) -> Result<WitnessCertificate> {
    let alphabet = x.alphabet();
    let set = SetDescriptor::NLc {
        l: block_len,
        bound: bound.clone(),
    };
    set.validate(alphabet)?;
    if alphabet.size() < 2 {
        return Err(Error::InvalidArgument(
            "over a one-letter alphabet every sequence has gap-free blocks".into(),
        ));
    }
    let n = epsilon_exp as usize;
    let base = base_prefix(x, n)?;
    let m = nlc_run_length(block_len, bound, n);
    let y = SymbolicSequence::eventually_periodic(alphabet, base.clone(), vec![1])?;
    Ok(certificate(
        set,
        base,
        epsilon_exp,
        y,
        n as u64 + m,
        format!(
            "{m} ones follow position {n}; the first gap starting among them has length at least {} > p({})",
            m as i64 - 2 * (block_len as i64 - (alphabet.size() as i64 - 1)),
            block_len * (n / block_len) + 1
        ),
    ))
}

/// Hole in the weighted `A{N, M}`: `y = (x_1..x_e, (1..N)^ω)` and the
/// smallest radius `2^{-m}` whose forced greedy blocks push the weighted
/// sum above `M`.
pub fn witness_a_weighted(
    x: &SymbolicSequence,
    m: u64,
    weights: &WeightFamily,
    epsilon_exp: u64,
    limits: &Limits,
) -> Result<WitnessCertificate> {
    if epsilon_exp == 0 {
        return Err(Error::EpsilonTooLarge {
            epsilon_exp,
            min_exp_exclusive: 0,
        });
    }
    let alphabet = x.alphabet();
    let n = alphabet.size() as usize;
    let j = epsilon_exp as usize;
    let base = base_prefix(x, j)?;
    let y = SymbolicSequence::eventually_periodic(alphabet, base.clone(), ascending(alphabet))?;
    let target = Interval::exact(m as f64);
    let g = crate::partition::greedy_partition(&y, n, 0)?;
    let too_slow = |blocks: usize| Error::DivergenceTooSlow {
        level: m as usize,
        cap: blocks,
    };
    let mut starts: Vec<u64> = Vec::new();
    let mut sum = Interval::ZERO;
    let mut checkpoint = 64usize;
    for r in g.iter_starts() {
        if r as usize + n - 1 > limits.witness_horizon || starts.len() >= limits.summation_terms {
            return Err(too_slow(starts.len()));
        }
        starts.push(r);
        let k = starts.len();
        sum = sum + weighted_term(&starts, n, weights, k)?;
        if sum.certainly_gt(target) {
            let radius = r + n as u64;
            return Ok(certificate(
                SetDescriptor::NfWeighted {
                    l: n,
                    m,
                    weights: weights.clone(),
                },
                base,
                epsilon_exp,
                y,
                radius,
                format!(
                    "the first {k} greedy blocks end by position {}; their weighted sum exceeds {m}",
                    radius - 1
                ),
            ));
        }
        if k == checkpoint {
            checkpoint *= 2;
            // a convergent family may never get there
            if let Some(tail) = weights.tail_bound(k) {
                if (sum + Interval::around(tail, 1)).certainly_lt(target) {
                    return Err(too_slow(k));
                }
            }
        }
    }
    Err(too_slow(starts.len()))
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VerifyMode {
    PrefixForced,
    Enumerate { extra: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// A ball prefix that is not excluded, and a simple completion of it that
/// lies in the set when one was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub word: Vec<Symbol>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub member_completion: Option<SymbolicSequence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub mode: VerifyMode,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Replays or enumerates the exclusion argument of a certificate.
pub fn verify_certificate(
    cert: &WitnessCertificate,
    mode: VerifyMode,
    limits: &Limits,
    exec: Execution,
) -> Result<VerificationReport> {
    let alphabet = cert.alphabet();
    cert.set.validate(alphabet)?;
    if !cert.witness.is_exact() {
        return Err(Error::InvalidArgument(
            "witness must be eventually periodic".into(),
        ));
    }
    let mut checks = vec![closeness_check(cert)?, hole_size_check(cert)];
    let mut counterexample = None;
    match mode {
        VerifyMode::PrefixForced => checks.extend(replay(cert)?),
        VerifyMode::Enumerate { extra } => {
            let (c, cx) = enumerate(cert, extra, limits, exec)?;
            checks.push(c);
            counterexample = cx;
        }
    }
    Ok(VerificationReport {
        passed: checks.iter().all(|c| c.passed),
        mode,
        checks,
        counterexample,
    })
}

/// `d(x, y) < ε`: agreement on `1..=e` gives `d ≤ 2^{-(e+1)}`.
fn closeness_check(cert: &WitnessCertificate) -> Result<Check> {
    let j = cert.epsilon_exp as usize;
    let agree = cert.base.len() >= j && cert.witness.prefix(j)? == cert.base[..j];
    Ok(check(
        "closeness",
        agree,
        format!("witness agrees with the base on positions 1..={j}, so d(x, y) < 2^-{j}"),
    ))
}

/// The hole is at least as large as the scale the construction promises.
fn hole_size_check(cert: &WitnessCertificate) -> Check {
    let e = cert.epsilon_exp;
    let n = cert.alphabet().size() as u64;
    let r = cert.radius_exp;
    match &cert.set {
        SetDescriptor::A { .. } => {
            // φ⁻¹(2^{-e}) = 2^{-e·2^e}
            let bound = if e < 64 { (e as u128) << e } else { u128::MAX };
            check(
                "hole_size",
                (r as u128) <= bound,
                format!("2^-{r} ≥ φ⁻¹(2^-{e}) = 2^-{bound}"),
            )
        }
        SetDescriptor::B { k, .. } => {
            let bound = e + n + (*k as u64 + 1) * n;
            check(
                "hole_size",
                r <= bound,
                format!("2^-{r} ≥ 2^-(N+(k+1)N)·ε = 2^-{bound}"),
            )
        }
        SetDescriptor::F { m, .. } => {
            let bound = e + m + 1;
            check(
                "hole_size",
                r <= bound,
                format!("2^-{r} ≥ 2^-(M+1)·ε = 2^-{bound}"),
            )
        }
        SetDescriptor::NLc { l, bound } => {
            let b = e + nlc_run_length(*l, bound, e as usize);
            check("hole_size", r <= b, format!("2^-{r} ≥ 2^-(n+m) = 2^-{b}"))
        }
        SetDescriptor::NfWeighted { .. } => check(
            "hole_size",
            r > e,
            format!("radius 2^-{r} lies inside the ε-ball"),
        ),
    }
}

/// The structural argument of each construction, evaluated on the forced prefix.
fn replay(cert: &WitnessCertificate) -> Result<Vec<Check>> {
    let alphabet = cert.alphabet();
    let n = alphabet.size() as usize;
    let forced_len = cert.radius_exp as usize;
    let w = cert.witness.prefix(forced_len)?;
    let j = cert.epsilon_exp as usize;
    let mut out = Vec::new();
    match &cert.set {
        SetDescriptor::A { l, m } => {
            if *m == 0 {
                out.push(check("excluded", true, "A with M = 0 is empty"));
                return Ok(out);
            }
            let ones = j + n;
            let shape = w.len() >= ones
                && w[j..ones].iter().all(|&s| s == 1)
                && w[ones..]
                    .iter()
                    .enumerate()
                    .all(|(i, &s)| s as usize == i % n + 1);
            out.push(check(
                "forced_structure",
                shape && *l == n,
                format!(
                    "positions {}..={ones} are 1 and (1..{n}) repeats from {} to {forced_len}",
                    j + 1,
                    ones + 1
                ),
            ));
            // Blocks at j+N+1+iN lying wholly inside the forced prefix.
            let count = forced_len.saturating_sub(ones) / n;
            let sum = (0..count).fold(Interval::ZERO, |acc, i| {
                acc + Interval::recip((ones + 1 + i * n) as u64)
            });
            let threshold = SetDescriptor::a_threshold(n, *m);
            out.push(check(
                "threshold",
                sum.certainly_ge(threshold),
                format!(
                    "Σ_{{i<{count}}} 1/({} + {n}i) ∈ [{:.6}, {:.6}] ≥ (1/{n})·ln {m} ∈ [{:.6}, {:.6}]",
                    ones + 1,
                    sum.lo,
                    sum.hi,
                    threshold.lo,
                    threshold.hi
                ),
            ));
        }
        SetDescriptor::B { l, k } => {
            let first = j + n;
            let blocks_ok = w.len() >= first + (k + 1) * n
                && (0..=*k).all(|i| covers(&w[first + i * n..first + (i + 1) * n], alphabet));
            out.push(check(
                "forced_blocks",
                blocks_ok && *l == n,
                format!(
                    "windows starting at {} + {n}i, i = 0..={k}, each cover 1..{n}; greedy starts are pointwise minimal, so block {} exists",
                    first + 1,
                    k + 1
                ),
            ));
        }
        SetDescriptor::F { n: symbol, m } => {
            let count = w.iter().filter(|&&s| s == *symbol).count() as u64;
            out.push(check(
                "occurrences",
                count >= *m,
                format!("forced prefix holds {count} occurrences of {symbol}, need {m}"),
            ));
        }
        SetDescriptor::NLc { l, bound } => {
            let run = forced_len.saturating_sub(j);
            let ones = w.len() >= j && w[j..].iter().all(|&s| s == 1);
            out.push(check(
                "forced_run",
                ones && n >= 2,
                format!("positions {}..={forced_len} are 1 ({run} entries)", j + 1),
            ));
            // The first gap starting in the run is block i ≤ L⌊n/L⌋ + 1 and has
            // length ≥ run − 2(L − (N − 1)).
            let overlap = 2 * (*l as i64 - (n as i64 - 1));
            let gap = run as i64 - overlap;
            let i_max = (l * (j / l) + 1) as u64;
            let p = bound.eval(i_max);
            let monotone = bound.check_monotone(i_max).is_none();
            out.push(check(
                "gap_bound",
                run as i64 > l.saturating_sub(n - 1) as i64 && (gap as f64) > p && monotone,
                format!("gap ≥ {run} − {overlap} = {gap} > p({i_max}) = {p} ≥ p(i) for every i ≤ {i_max}"),
            ));
        }
        SetDescriptor::NfWeighted { l, m, weights } => {
            let starts: Vec<u64> = greedy_starts_in_word(&w, alphabet, *l, usize::MAX);
            let sum = weighted_partial_sum(&starts, *l, weights, starts.len())?;
            let target = Interval::exact(*m as f64);
            out.push(check(
                "weighted_threshold",
                sum.certainly_ge(target) && *l == n,
                format!(
                    "{} greedy blocks end inside the forced prefix, so every ball member shares them; weighted sum ∈ [{:.6}, {:.6}] ≥ {m}",
                    starts.len(),
                    sum.lo,
                    sum.hi
                ),
            ));
        }
    }
    Ok(out)
}

/// Whether a finite word (a ball prefix) already excludes every extension
/// from the set, decided without the structural argument.
fn word_excluded(
    set: &SetDescriptor,
    alphabet: Alphabet,
    word: &[Symbol],
    limits: &Limits,
) -> Result<bool> {
    Ok(match set {
        SetDescriptor::A { l, m } => {
            excluded_from_a(word, alphabet, *l, *m)?.verdict == Verdict::ExcludedByPrefix
        }
        SetDescriptor::B { l, k } => greedy_starts_in_word(word, alphabet, *l, k + 1).len() > *k,
        SetDescriptor::F { n, m } => word.iter().filter(|&&s| s == *n).count() as u64 >= *m,
        SetDescriptor::NLc { l, bound } => {
            representation_search(word, alphabet, *l, bound)? == RepresentationSearch::Infeasible
        }
        SetDescriptor::NfWeighted { .. } => {
            let x = SymbolicSequence::finite_prefix(alphabet, word.to_vec())?;
            match membership(&x, set, limits) {
                Ok(r) => r.verdict == Verdict::ExcludedByPrefix,
                Err(Error::UndecidableAtHorizon(_)) => false,
                Err(e) => return Err(e),
            }
        }
    })
}

fn enumerate(
    cert: &WitnessCertificate,
    extra: usize,
    limits: &Limits,
    exec: Execution,
) -> Result<(Check, Option<Counterexample>)> {
    let alphabet = cert.alphabet();
    let words = enumerate_ball_prefixes(
        &cert.witness,
        cert.radius(),
        extra,
        limits.enumeration_words,
    )?;
    // Errors inside the predicate are surfaced after the scan.
    let failure = find_first_failure(exec, &words, |w| {
        word_excluded(&cert.set, alphabet, w, limits).unwrap_or(false)
    });
    match failure {
        None => Ok((
            check(
                "enumeration",
                true,
                format!(
                    "all {} prefixes of length {} in the ball exclude the set",
                    words.len(),
                    cert.radius_exp as usize + extra
                ),
            ),
            None,
        )),
        Some(i) => {
            let word = words[i].clone();
            // distinguish a genuine escape from an evaluation error
            word_excluded(&cert.set, alphabet, &word, limits)?;
            let member_completion = member_completion(&cert.set, alphabet, &word, limits);
            Ok((
                check(
                    "enumeration",
                    false,
                    format!("ball prefix #{i} does not exclude the set"),
                ),
                Some(Counterexample {
                    word,
                    member_completion,
                }),
            ))
        }
    }
}

/// Tries constant tails and the ascending period as completions of `word`.
fn member_completion(
    set: &SetDescriptor,
    alphabet: Alphabet,
    word: &[Symbol],
    limits: &Limits,
) -> Option<SymbolicSequence> {
    let tails = alphabet
        .symbols()
        .map(|c| vec![c])
        .chain(std::iter::once(ascending(alphabet)));
    tails
        .filter_map(|period| {
            SymbolicSequence::eventually_periodic(alphabet, word.to_vec(), period).ok()
        })
        .find(|z| matches!(membership(z, set, limits), Ok(r) if r.verdict == Verdict::Member))
}

/// Re-checks a closed verdict against an independent exact classification:
/// the witness itself must lie outside the set.
pub fn witness_outside_set(cert: &WitnessCertificate, limits: &Limits) -> Result<bool> {
    let r = membership(&cert.witness, &cert.set, limits)?;
    Ok(r.verdict == Verdict::NonMember)
}

/// Greedy-based exclusion of an `N_{L,c}` ball, used to cross-check the
/// representation search.
pub fn nlc_prefix_excluded(cert: &WitnessCertificate) -> Result<bool> {
    let SetDescriptor::NLc { l, bound } = &cert.set else {
        return Err(Error::InvalidArgument("not an N_{L,c} certificate".into()));
    };
    let w = cert.witness.prefix(cert.radius_exp as usize)?;
    let x = SymbolicSequence::finite_prefix(cert.alphabet(), w)?;
    Ok(satisfies_p_lc(&x, *l, bound, usize::MAX)?.verdict == Verdict::ExcludedByPrefix)
}
