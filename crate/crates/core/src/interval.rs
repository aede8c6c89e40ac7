//! Closed intervals of `f64` with outward rounding.
//!
//! Every operation widens its result by one ulp in each direction, which
//! over-covers the true value regardless of the rounding mode used by the
//! hardware. Threshold comparisons go through [`Interval::certainly_ge`] and
//! friends so that a verdict never rests on a single rounded float.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    /// A degenerate interval; `x` must be exactly the intended value.
    pub fn exact(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Encloses a float result that carries at most `ulps` ulps of error.
    pub fn around(x: f64, ulps: u32) -> Self {
        let (mut lo, mut hi) = (x, x);
        for _ in 0..ulps {
            lo = lo.next_down();
            hi = hi.next_up();
        }
        Interval { lo, hi }
    }

    /// `1/n` for a positive integer.
    pub fn recip(n: u64) -> Self {
        debug_assert!(n > 0);
        if n.is_power_of_two() {
            Interval::exact(1.0 / n as f64)
        } else {
            Interval::around(1.0 / n as f64, 1)
        }
    }

    /// `ln(m) / l` for positive integers; `ln` is trusted to 2 ulps.
    pub fn ln_ratio(m: u64, l: u64) -> Self {
        debug_assert!(m > 0 && l > 0);
        if m == 1 {
            return Interval::ZERO;
        }
        let ln = Interval::around((m as f64).ln(), 2);
        ln.div_scalar(l as f64)
    }

    /// Division by a positive scalar.
    pub fn div_scalar(self, d: f64) -> Self {
        debug_assert!(d > 0.0);
        Interval {
            lo: (self.lo / d).next_down(),
            hi: (self.hi / d).next_up(),
        }
    }

    /// Reciprocal of a strictly positive interval.
    pub fn recip_of(self) -> Self {
        debug_assert!(self.lo > 0.0);
        Interval {
            lo: (1.0 / self.hi).next_down(),
            hi: (1.0 / self.lo).next_up(),
        }
    }

    /// Product of two nonnegative intervals.
    pub fn mul_nonneg(self, other: Interval) -> Self {
        debug_assert!(self.lo >= 0.0 && other.lo >= 0.0);
        Interval {
            lo: (self.lo * other.lo).next_down().max(0.0),
            hi: (self.hi * other.hi).next_up(),
        }
    }

    pub fn mid(self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Every point of `self` is `≥` every point of `other`.
    pub fn certainly_ge(self, other: Interval) -> bool {
        self.lo >= other.hi
    }

    /// Every point of `self` is `>` every point of `other`.
    pub fn certainly_gt(self, other: Interval) -> bool {
        self.lo > other.hi
    }

    pub fn certainly_lt(self, other: Interval) -> bool {
        self.hi < other.lo
    }
}

/// Sum of reciprocals `Σ 1/r` with outward rounding.
pub fn reciprocal_sum<I: IntoIterator<Item = u64>>(values: I) -> Interval {
    values
        .into_iter()
        .fold(Interval::ZERO, |acc, r| acc + Interval::recip(r))
}

impl std::ops::Add for Interval {
    type Output = Interval;

    fn add(self, other: Interval) -> Interval {
        Interval {
            lo: (self.lo + other.lo).next_down(),
            hi: (self.hi + other.hi).next_up(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encloses_harmonic_sum() {
        let s = reciprocal_sum(1..=10);
        // H_10 = 7381/2520
        assert!(s.contains(7381.0 / 2520.0));
        assert!(s.hi - s.lo < 1e-13);
    }

    #[test]
    fn ln_ratio_encloses() {
        let t = Interval::ln_ratio(2, 3);
        assert!(t.contains(std::f64::consts::LN_2 / 3.0));
        assert_eq!(Interval::ln_ratio(1, 3), Interval::ZERO);
    }

    #[test]
    fn comparisons_are_strict() {
        let a = Interval::new(1.0, 2.0);
        let b = Interval::new(2.0, 3.0);
        assert!(b.certainly_ge(a));
        assert!(!b.certainly_gt(a));
        assert!(!a.certainly_lt(b));
    }
}
