//! Block partitions of sequences: greedy `L`-partitions, exhaustive valid
//! partitions of short words, gap decompositions and quasi-periods.
//!
//! A block is a window of `L` consecutive entries containing every symbol of
//! the alphabet. The greedy `L`-partition picks each block start as small as
//! possible subject to not overlapping the previous block.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{reciprocal_sum, Interval};
use crate::seqspace::{Alphabet, SeqModel, Symbol, SymbolicSequence};

/// Default limits for [`enumerate_valid_partitions`].
pub const ENUMERATION_MAX_LEN: usize = 20;
pub const ENUMERATION_MAX_ALPHABET: u32 = 4;

/// The repeating part of an infinite greedy partition: from block
/// `first_block` on, `r_{k + blocks} = r_k + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailCycle {
    pub first_block: usize,
    pub blocks: usize,
    pub shift: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GreedyStatus {
    /// Infinitely many blocks; consecutive starts eventually differ by at
    /// most `eventual_gap`.
    ProvenInfinite { eventual_gap: u64, cycle: TailCycle },
    /// The partition has exactly `k` blocks.
    ExistsUpToBlock { k: usize },
    /// Only a prefix of length `horizon` is known.
    UndeterminedBeyondHorizon { horizon: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyPartition {
    #[serde(rename = "L")]
    pub block_len: usize,
    /// `r_1, r_2, …` (1-based), truncated to the requested number of blocks.
    pub starts: Vec<u64>,
    pub status: GreedyStatus,
    /// All starts through the end of the first tail cycle.
    #[serde(skip)]
    head: Vec<u64>,
}

impl GreedyPartition {
    pub fn is_infinite(&self) -> bool {
        matches!(self.status, GreedyStatus::ProvenInfinite { .. })
    }

    /// Number of blocks when the partition is known to be finite.
    pub fn block_count(&self) -> Option<usize> {
        match self.status {
            GreedyStatus::ExistsUpToBlock { k } => Some(k),
            _ => None,
        }
    }

    /// `r_k` for any `k ≥ 1`, extrapolating along the tail cycle.
    pub fn start(&self, k: usize) -> Option<u64> {
        if k == 0 {
            return None;
        }
        if let Some(&r) = self.head.get(k - 1) {
            return Some(r);
        }
        match self.status {
            GreedyStatus::ProvenInfinite { cycle, .. } => {
                let offset = k - cycle.first_block;
                let turns = (offset / cycle.blocks) as u64;
                let base = self.head[cycle.first_block - 1 + offset % cycle.blocks];
                Some(base + turns * cycle.shift)
            }
            _ => None,
        }
    }

    /// Iterates `r_1, r_2, …` (infinite when the partition is).
    pub fn iter_starts(&self) -> impl Iterator<Item = u64> + '_ {
        (1..).map_while(move |k| self.start(k))
    }
}

/// Sliding-window coverage test over a fixed slice.
struct Coverage {
    counts: Vec<u32>,
    distinct: u32,
    n: u32,
}

impl Coverage {
    fn new(n: u32) -> Self {
        Coverage {
            counts: vec![0; n as usize + 1],
            distinct: 0,
            n,
        }
    }

    fn push(&mut self, s: Symbol) {
        let c = &mut self.counts[s as usize];
        if *c == 0 {
            self.distinct += 1;
        }
        *c += 1;
    }

    fn pop(&mut self, s: Symbol) {
        let c = &mut self.counts[s as usize];
        *c -= 1;
        if *c == 0 {
            self.distinct -= 1;
        }
    }

    fn full(&self) -> bool {
        self.distinct == self.n
    }

    fn clear(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.distinct = 0;
    }
}

/// Whether `window` contains every symbol of the alphabet.
pub fn covers(window: &[Symbol], alphabet: Alphabet) -> bool {
    let mut cov = Coverage::new(alphabet.size());
    window.iter().for_each(|&s| cov.push(s));
    cov.full()
}

pub(crate) fn check_block_len(block_len: usize, alphabet: Alphabet) -> Result<()> {
    if block_len < alphabet.size() as usize {
        return Err(Error::LTooSmall {
            l: block_len,
            n: alphabet.size(),
        });
    }
    Ok(())
}

/// Greedy block starts (1-based) of blocks lying wholly inside `word`.
pub fn greedy_starts_in_word(
    word: &[Symbol],
    alphabet: Alphabet,
    block_len: usize,
    max_blocks: usize,
) -> Vec<u64> {
    let mut starts = Vec::new();
    let mut cov = Coverage::new(alphabet.size());
    let mut from = 0usize;
    'outer: while starts.len() < max_blocks && from + block_len <= word.len() {
        cov.clear();
        for &s in &word[from..from + block_len] {
            cov.push(s);
        }
        let mut r = from;
        loop {
            if cov.full() {
                starts.push(r as u64 + 1);
                from = r + block_len;
                continue 'outer;
            }
            if r + block_len >= word.len() {
                break 'outer;
            }
            cov.pop(word[r]);
            cov.push(word[r + block_len]);
            r += 1;
        }
    }
    starts
}

/// Computes the greedy `L`-partition.
///
/// For eventually periodic input the scan stops as soon as a block start in
/// the periodic part repeats its phase, after which the starts are known in
/// closed form; `starts` is then filled to `max_blocks`.
pub fn greedy_partition(
    x: &SymbolicSequence,
    block_len: usize,
    max_blocks: usize,
) -> Result<GreedyPartition> {
    let alphabet = x.alphabet();
    check_block_len(block_len, alphabet)?;
    match x.model() {
        SeqModel::FinitePrefix { prefix } => {
            let starts = greedy_starts_in_word(prefix, alphabet, block_len, max_blocks);
            Ok(GreedyPartition {
                block_len,
                head: starts.clone(),
                starts,
                status: GreedyStatus::UndeterminedBeyondHorizon {
                    horizon: prefix.len(),
                },
            })
        }
        SeqModel::EventuallyPeriodic { transient, period } => {
            let (t, p) = (transient.len(), period.len());
            // Every window starting in the periodic part is a rotation window.
            let word = x.prefix(t + 2 * p + block_len)?;
            let cyclic_cover = (t..t + p).any(|r| covers(&word[r..r + block_len], alphabet));
            let entry = |i: usize| -> Symbol {
                if i < t {
                    transient[i]
                } else {
                    period[(i - t) % p]
                }
            };
            let window_covers = |r: usize| {
                let mut cov = Coverage::new(alphabet.size());
                (r..r + block_len).for_each(|i| cov.push(entry(i)));
                cov.full()
            };

            let mut head: Vec<u64> = Vec::new();
            let mut seen: HashMap<usize, usize> = HashMap::new();
            let mut from = 0usize;
            loop {
                // Past the transient only rotation windows remain.
                let limit = if cyclic_cover { from.max(t) + p } else { t };
                let found = (from..limit).find(|&r| window_covers(r));
                let Some(r) = found else {
                    let k = head.len();
                    let starts = head.iter().copied().take(max_blocks).collect();
                    return Ok(GreedyPartition {
                        block_len,
                        starts,
                        status: GreedyStatus::ExistsUpToBlock { k },
                        head,
                    });
                };
                head.push(r as u64 + 1);
                if r >= t {
                    let phase = (r - t) % p;
                    if let Some(&k1) = seen.get(&phase) {
                        let k2 = head.len();
                        let cycle = TailCycle {
                            first_block: k1,
                            blocks: k2 - k1,
                            shift: head[k2 - 1] - head[k1 - 1],
                        };
                        let eventual_gap = head[k1 - 1..]
                            .windows(2)
                            .map(|w| w[1] - w[0])
                            .max()
                            .expect("cycle spans at least one gap");
                        head.pop();
                        let mut gp = GreedyPartition {
                            block_len,
                            starts: Vec::new(),
                            status: GreedyStatus::ProvenInfinite {
                                eventual_gap,
                                cycle,
                            },
                            head,
                        };
                        gp.starts = (1..=max_blocks).filter_map(|k| gp.start(k)).collect();
                        return Ok(gp);
                    }
                    seen.insert(phase, head.len());
                }
                from = r + block_len;
            }
        }
    }
}

/// All valid `L`-partitions of a short word: increasing starts, pairwise at
/// least `L` apart, every block inside the word and covering the alphabet.
/// Sorted by number of blocks, then lexicographically; includes `()`.
pub fn enumerate_valid_partitions(
    prefix: &[Symbol],
    alphabet: Alphabet,
    block_len: usize,
) -> Result<Vec<Vec<u64>>> {
    enumerate_valid_partitions_capped(
        prefix,
        alphabet,
        block_len,
        ENUMERATION_MAX_LEN,
        ENUMERATION_MAX_ALPHABET,
    )
}

pub fn enumerate_valid_partitions_capped(
    prefix: &[Symbol],
    alphabet: Alphabet,
    block_len: usize,
    max_len: usize,
    max_alphabet: u32,
) -> Result<Vec<Vec<u64>>> {
    check_block_len(block_len, alphabet)?;
    if prefix.len() > max_len {
        return Err(Error::CapExceeded {
            what: "valid-partition enumeration length",
            requested: prefix.len() as u128,
            cap: max_len as u128,
        });
    }
    if alphabet.size() > max_alphabet {
        return Err(Error::CapExceeded {
            what: "valid-partition enumeration alphabet",
            requested: alphabet.size() as u128,
            cap: max_alphabet as u128,
        });
    }
    let valid: Vec<bool> = (0..prefix.len())
        .map(|r| r + block_len <= prefix.len() && covers(&prefix[r..r + block_len], alphabet))
        .collect();

    fn extend(
        from: usize,
        valid: &[bool],
        block_len: usize,
        current: &mut Vec<u64>,
        out: &mut Vec<Vec<u64>>,
    ) {
        out.push(current.clone());
        for r in from..valid.len() {
            if valid[r] {
                current.push(r as u64 + 1);
                extend(r + block_len, valid, block_len, current, out);
                current.pop();
            }
        }
    }

    let mut out = Vec::new();
    extend(0, &valid, block_len, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// `S_1 R_1 S_2 R_2 …`: the gap lengths `|S_k|` between blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    #[serde(rename = "L")]
    pub block_len: usize,
    pub starts: Vec<u64>,
    pub gaps: Vec<u64>,
}

impl BlockDecomposition {
    /// `r_k = 1 + (k−1)L + Σ_{i≤k} |S_i|` for every `k`.
    pub fn identity_holds(&self) -> bool {
        let mut gap_sum = 0u64;
        self.starts
            .iter()
            .zip(&self.gaps)
            .enumerate()
            .all(|(i, (&r, &g))| {
                gap_sum += g;
                r == 1 + i as u64 * self.block_len as u64 + gap_sum
            })
    }

    /// Cumulative gap sums `Σ_{i≤k} |S_i|`.
    pub fn cumulative_gaps(&self) -> Vec<u64> {
        self.gaps
            .iter()
            .scan(0u64, |acc, &g| {
                *acc += g;
                Some(*acc)
            })
            .collect()
    }
}

/// Splits `x` along a valid partition into gap lengths.
pub fn decompose(
    x: &SymbolicSequence,
    starts: &[u64],
    block_len: usize,
) -> Result<BlockDecomposition> {
    let alphabet = x.alphabet();
    check_block_len(block_len, alphabet)?;
    let mut gaps = Vec::with_capacity(starts.len());
    let mut next_free = 1u64;
    for (k, &r) in starts.iter().enumerate() {
        if r < next_free {
            return Err(Error::InvalidPartition(format!(
                "block {} starts at {r}, before position {next_free}",
                k + 1
            )));
        }
        let lo = r as usize;
        let block = x
            .prefix(lo + block_len - 1)
            .map_err(|_| {
                Error::InvalidPartition(format!("block {} extends past the horizon", k + 1))
            })?
            .split_off(lo - 1);
        if !covers(&block, alphabet) {
            return Err(Error::InvalidPartition(format!(
                "block {} at {r} does not contain every symbol",
                k + 1
            )));
        }
        gaps.push(r - next_free);
        next_free = r + block_len as u64;
    }
    Ok(BlockDecomposition {
        block_len,
        starts: starts.to_vec(),
        gaps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiPeriodReport {
    pub quasi_period: Option<usize>,
}

/// The smallest `m` such that every window of length `m` contains the whole
/// alphabet, or `None` when some symbol is missing from the period.
pub fn quasi_period(x: &SymbolicSequence) -> Result<QuasiPeriodReport> {
    let (transient, period) = x.parts().ok_or(Error::NotExact)?;
    let alphabet = x.alphabet();
    if !covers(period, alphabet) {
        return Ok(QuasiPeriodReport { quasi_period: None });
    }
    let (t, p) = (transient.len(), period.len());
    // Windows starting after t + p repeat earlier ones; each needs at most p more entries.
    let word = x.prefix(t + 2 * p)?;
    let mut worst = 0usize;
    for k in 0..t + p {
        let mut cov = Coverage::new(alphabet.size());
        let mut len = 0;
        for &s in &word[k..] {
            cov.push(s);
            len += 1;
            if cov.full() {
                break;
            }
        }
        debug_assert!(cov.full());
        worst = worst.max(len);
    }
    Ok(QuasiPeriodReport {
        quasi_period: Some(worst),
    })
}

/// Exact `Σ_{k ≤ count} 1/r_k`.
pub fn partial_sum(starts: &[u64], count: usize) -> Result<BigRational> {
    if count > starts.len() {
        return Err(Error::InvalidArgument(format!(
            "count {count} exceeds the {} available starts",
            starts.len()
        )));
    }
    Ok(starts[..count].iter().fold(BigRational::zero(), |acc, &r| {
        acc + BigRational::new(BigInt::from(1), BigInt::from(r))
    }))
}

/// `Σ_{k ≤ count} 1/r_k` as an outward-rounded interval.
pub fn partial_sum_interval(starts: &[u64], count: usize) -> Result<Interval> {
    if count > starts.len() {
        return Err(Error::InvalidArgument(format!(
            "count {count} exceeds the {} available starts",
            starts.len()
        )));
    }
    Ok(reciprocal_sum(starts[..count].iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: u32) -> Alphabet {
        Alphabet::new(n).unwrap()
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn greedy_on_periodic_123() {
        let x = SymbolicSequence::periodic(a(3), vec![1, 2, 3]).unwrap();
        let g = greedy_partition(&x, 3, 5).unwrap();
        assert_eq!(g.starts, vec![1, 4, 7, 10, 13]);
        match g.status {
            GreedyStatus::ProvenInfinite { eventual_gap, .. } => assert_eq!(eventual_gap, 3),
            ref s => panic!("unexpected {s:?}"),
        }
        assert_eq!(g.start(1000), Some(1 + 3 * 999));
    }

    #[test]
    fn greedy_missing_symbol_has_no_blocks() {
        let x = SymbolicSequence::periodic(a(3), vec![1, 2]).unwrap();
        let g = greedy_partition(&x, 3, 5).unwrap();
        assert_eq!(g.status, GreedyStatus::ExistsUpToBlock { k: 0 });
        assert!(g.starts.is_empty());
    }

    #[test]
    fn greedy_with_transient() {
        let x = SymbolicSequence::eventually_periodic(
            a(3),
            vec![1, 1, 2, 3, 2, 2, 1, 3],
            vec![1, 2, 3],
        )
        .unwrap();
        let g = greedy_partition(&x, 3, 4).unwrap();
        // blocks at 2 and 6 inside the transient, then the period from 9 on
        assert_eq!(g.starts, vec![2, 6, 9, 12]);
        assert!(g.is_infinite());
    }

    #[test]
    fn greedy_needs_rotation_window_not_just_symbols() {
        // every symbol occurs in the period, yet no window of length 3 covers
        let x = SymbolicSequence::periodic(a(3), vec![1, 1, 1, 2, 2, 2, 3, 3, 3]).unwrap();
        let g = greedy_partition(&x, 3, 5).unwrap();
        assert_eq!(g.status, GreedyStatus::ExistsUpToBlock { k: 0 });
        // transient blocks survive even then
        let y = SymbolicSequence::eventually_periodic(a(3), vec![3, 2, 1], vec![1, 1, 2, 2, 3, 3])
            .unwrap();
        let g = greedy_partition(&y, 3, 5).unwrap();
        assert_eq!(g.status, GreedyStatus::ExistsUpToBlock { k: 1 });
        assert_eq!(g.starts, vec![1]);
        // a longer L sees every symbol
        let g = greedy_partition(&y, 5, 3).unwrap();
        assert!(g.is_infinite());
    }

    #[test]
    fn greedy_irregular_cycle() {
        // period 1,2,1,1,2 with N=2, L=2: windows (1,2),(2,1),(1,1),(1,2),(2,1)
        let x = SymbolicSequence::periodic(a(2), vec![1, 2, 1, 1, 2]).unwrap();
        let g = greedy_partition(&x, 2, 8).unwrap();
        let word = x.prefix(200).unwrap();
        let brute = greedy_starts_in_word(&word, a(2), 2, 8);
        assert_eq!(g.starts, brute);
        assert_eq!(
            g.start(60),
            greedy_starts_in_word(&word, a(2), 2, 60).get(59).copied()
        );
    }

    #[test]
    fn greedy_rejects_short_blocks() {
        let x = SymbolicSequence::periodic(a(3), vec![1, 2, 3]).unwrap();
        assert_eq!(
            greedy_partition(&x, 2, 3),
            Err(Error::LTooSmall { l: 2, n: 3 })
        );
    }

    #[test]
    fn greedy_on_prefix_is_undetermined() {
        let x = SymbolicSequence::finite_prefix(a(3), vec![2, 1, 3, 3, 1, 2, 1]).unwrap();
        let g = greedy_partition(&x, 3, 10).unwrap();
        assert_eq!(g.starts, vec![1, 4]);
        assert_eq!(
            g.status,
            GreedyStatus::UndeterminedBeyondHorizon { horizon: 7 }
        );
    }

    #[test]
    fn valid_partition_examples() {
        let got = enumerate_valid_partitions(&[1, 2, 3, 1, 2, 3], a(3), 3).unwrap();
        let want: Vec<Vec<u64>> = vec![vec![], vec![1], vec![2], vec![3], vec![4], vec![1, 4]];
        assert_eq!(got, want);
        assert_eq!(
            enumerate_valid_partitions(&[1, 1, 1], a(3), 3).unwrap(),
            vec![Vec::<u64>::new()]
        );
        assert_eq!(
            enumerate_valid_partitions(&[1, 2, 3], a(3), 3).unwrap(),
            vec![vec![], vec![1]]
        );
        assert!(matches!(
            enumerate_valid_partitions(&[1; 21], a(3), 3),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn decompose_examples() {
        let x = SymbolicSequence::periodic(a(3), vec![1, 2, 3]).unwrap();
        let d = decompose(&x, &[1, 4, 7], 3).unwrap();
        assert_eq!(d.gaps, vec![0, 0, 0]);
        assert!(d.identity_holds());

        let y = SymbolicSequence::eventually_periodic(
            a(3),
            vec![1, 1, 2, 3, 2, 2, 1, 3],
            vec![1, 2, 3],
        )
        .unwrap();
        let d = decompose(&y, &[2, 6], 3).unwrap();
        assert_eq!(d.gaps, vec![1, 1]);
        assert!(d.identity_holds());

        let z = SymbolicSequence::periodic(a(4), vec![1, 1, 1, 1, 1, 2, 3, 4]).unwrap();
        let d = decompose(&z, &[5], 4).unwrap();
        assert_eq!(d.gaps, vec![4]);

        assert!(matches!(
            decompose(&x, &[1, 3], 3),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(
            decompose(&y, &[1], 3),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn quasi_period_examples() {
        let q = |t: Vec<u32>, p: Vec<u32>| {
            quasi_period(&SymbolicSequence::eventually_periodic(a(3), t, p).unwrap())
                .unwrap()
                .quasi_period
        };
        assert_eq!(q(vec![], vec![1, 2, 3]), Some(3));
        assert_eq!(q(vec![], vec![1, 2, 3, 3, 2, 1]), Some(5));
        assert_eq!(q(vec![], vec![1, 2]), None);
        // the transient counts: window (1,1,1,2,3) needs 5
        assert_eq!(q(vec![1, 1, 1], vec![2, 3, 1]), Some(5));
        let p = SymbolicSequence::finite_prefix(a(3), vec![1, 2, 3]).unwrap();
        assert_eq!(quasi_period(&p), Err(Error::NotExact));
    }

    #[test]
    fn partial_sum_examples() {
        assert_eq!(partial_sum(&[1, 4, 7], 3).unwrap(), ratio(39, 28));
        assert_eq!(partial_sum(&[2], 1).unwrap(), ratio(1, 2));
        assert_eq!(partial_sum(&[1, 4, 7, 10], 2).unwrap(), ratio(5, 4));
        assert!(partial_sum(&[1], 2).is_err());
        let iv = partial_sum_interval(&[1, 4, 7], 3).unwrap();
        assert!(iv.contains(39.0 / 28.0));
    }
}
