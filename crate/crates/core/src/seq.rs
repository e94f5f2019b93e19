//! Big-integer Lucas and Pell sequence kernels, membership tests, and exact
//! divisibility valuations.
//!
//! Sequence values are always produced by the integer recurrences; the Binet
//! closed forms are used only for interval bounds elsewhere. That keeps every
//! value this module hands out exact.

use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::sync::RwLock;

/// Which of the two recurrences is in play.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SequenceKind {
    /// `L_0 = 2, L_1 = 1, L_t = L_{t-1} + L_{t-2}`.
    Lucas,
    /// `P_0 = 0, P_1 = 1, P_t = 2 P_{t-1} + P_{t-2}`.
    Pell,
}

impl SequenceKind {
    pub fn name(self) -> &'static str {
        match self {
            SequenceKind::Lucas => "lucas",
            SequenceKind::Pell => "pell",
        }
    }

    fn seeds(self) -> (BigUint, BigUint) {
        match self {
            SequenceKind::Lucas => (BigUint::from(2u32), BigUint::from(1u32)),
            SequenceKind::Pell => (BigUint::zero(), BigUint::one()),
        }
    }

    fn step(self, prev: &BigUint, cur: &BigUint) -> BigUint {
        match self {
            SequenceKind::Lucas => prev + cur,
            SequenceKind::Pell => prev + (cur << 1),
        }
    }
}

/// A tuple `(r, m, n, k)` satisfying `W_m^{n+k} + W_m^n = W_r` exactly for
/// its sequence kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SolutionTuple {
    pub r: u64,
    pub m: u64,
    pub n: u64,
    pub k: u64,
}

impl SolutionTuple {
    /// Re-evaluates the defining equation from scratch.
    pub fn satisfies_equation(&self, kind: SequenceKind) -> bool {
        let base = term(kind, self.m);
        let w_n = pow_uint(&base, self.n);
        let w_nk = pow_uint(&base, self.n + self.k);
        w_nk + w_n == term(kind, self.r)
    }
}

/// `t`-th term, computed by the iterative recurrence.
pub fn lucas(t: u64) -> BigUint {
    term(SequenceKind::Lucas, t)
}

/// `t`-th term, computed by the iterative recurrence.
pub fn pell(t: u64) -> BigUint {
    term(SequenceKind::Pell, t)
}

pub fn term(kind: SequenceKind, t: u64) -> BigUint {
    let (mut prev, mut cur) = kind.seeds();
    if t == 0 {
        return prev;
    }
    for _ in 1..t {
        let next = kind.step(&prev, &cur);
        prev = cur;
        cur = next;
    }
    cur
}

/// Integer power by repeated squaring.
pub fn pow_uint(base: &BigUint, e: u64) -> BigUint {
    let mut result = BigUint::one();
    let mut acc = base.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &acc;
        }
        e >>= 1;
        if e > 0 {
            acc = &acc * &acc;
        }
    }
    result
}

/// The unique `e >= 0` with `base^e | value` and `base^{e+1} not | value`.
/// Requires `base >= 2` and `value >= 1`.
pub fn exact_valuation(base: &BigUint, value: &BigUint) -> Result<u64> {
    if *base <= BigUint::one() {
        return Err(Error::Domain(format!(
            "exact_valuation: base must be >= 2, got {base}"
        )));
    }
    if value.is_zero() {
        return Err(Error::Domain("exact_valuation: value must be >= 1".into()));
    }
    let mut e = 0u64;
    let mut cur = value.clone();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&cur, base);
        if !r.is_zero() {
            return Ok(e);
        }
        cur = q;
        e += 1;
    }
}

/// Grow-on-demand cache of one sequence. Reads behave as if each term were
/// recomputed; the lock only guards the append.
pub struct SequenceCache {
    kind: SequenceKind,
    values: RwLock<Vec<BigUint>>,
}

impl SequenceCache {
    pub fn new(kind: SequenceKind) -> Self {
        let (a, b) = kind.seeds();
        SequenceCache {
            kind,
            values: RwLock::new(vec![a, b]),
        }
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn get(&self, t: u64) -> BigUint {
        let idx = t as usize;
        {
            let values = self.values.read().unwrap();
            if idx < values.len() {
                return values[idx].clone();
            }
        }
        let mut values = self.values.write().unwrap();
        while values.len() <= idx {
            let next = self
                .kind
                .step(&values[values.len() - 2], &values[values.len() - 1]);
            values.push(next);
        }
        values[idx].clone()
    }

    /// Extends the cache until the last term exceeds `limit` and returns the
    /// number of cached terms. Terms are strictly increasing from index 1
    /// (Lucas) or index 0 (Pell), so the scan below is complete.
    pub fn extend_past(&self, limit: &BigUint) -> usize {
        let mut values = self.values.write().unwrap();
        while values.last().unwrap() <= limit || values.len() < 3 {
            let next = self
                .kind
                .step(&values[values.len() - 2], &values[values.len() - 1]);
            values.push(next);
        }
        values.len()
    }

    /// Smallest index `t` with `W_t == value`, if any.
    ///
    /// Tie-breaking: the scan runs in index order, so repeated values would
    /// resolve to the smallest index. Neither sequence repeats a value at
    /// distinct indices (Lucas is strictly increasing from index 1, Pell from
    /// index 0), so the rule is only ever exercised trivially: Lucas value 1
    /// maps to index 1 and value 2 to index 0.
    pub fn find_index(&self, value: &BigUint) -> Option<u64> {
        self.extend_past(value);
        let values = self.values.read().unwrap();
        for (t, v) in values.iter().enumerate() {
            if v == value {
                return Some(t as u64);
            }
            // Monotone past the seeds: once beyond `value`, stop.
            if t >= 2 && v > value {
                return None;
            }
        }
        None
    }
}

/// Smallest index `t` with `W_t == value`, or `None`. Fresh enumeration per
/// call; use [`SequenceCache::find_index`] inside loops.
pub fn is_member(value: &BigUint, kind: SequenceKind) -> Option<u64> {
    SequenceCache::new(kind).find_index(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lucas_small_values() {
        assert_eq!(lucas(0), BigUint::from(2u32));
        assert_eq!(lucas(1), BigUint::from(1u32));
        assert_eq!(lucas(2), BigUint::from(3u32));
        assert_eq!(lucas(8), BigUint::from(47u32));
    }

    #[test]
    fn pell_small_values() {
        assert_eq!(pell(0), BigUint::zero());
        assert_eq!(pell(1), BigUint::one());
        assert_eq!(pell(2), BigUint::from(2u32));
        assert_eq!(pell(4), BigUint::from(12u32));
    }

    #[test]
    fn valuation_examples() {
        let v = |b: u32, x: u32| exact_valuation(&BigUint::from(b), &BigUint::from(x)).unwrap();
        assert_eq!(v(3, 36), 2);
        assert_eq!(v(2, 12), 2);
        assert_eq!(v(3, 18), 2);
        assert_eq!(v(5, 7), 0);
    }

    #[test]
    fn valuation_rejects_unit_base() {
        assert!(exact_valuation(&BigUint::one(), &BigUint::from(6u32)).is_err());
    }

    #[test]
    fn membership_examples() {
        assert_eq!(is_member(&BigUint::from(47u32), SequenceKind::Lucas), Some(8));
        assert_eq!(is_member(&BigUint::from(12u32), SequenceKind::Pell), Some(4));
        assert_eq!(is_member(&BigUint::from(13u32), SequenceKind::Lucas), None);
        // The non-monotone Lucas prefix: 2 sits at index 0, 1 at index 1.
        assert_eq!(is_member(&BigUint::from(2u32), SequenceKind::Lucas), Some(0));
        assert_eq!(is_member(&BigUint::from(1u32), SequenceKind::Lucas), Some(1));
        assert_eq!(is_member(&BigUint::zero(), SequenceKind::Pell), Some(0));
    }

    #[test]
    fn membership_round_trip() {
        let lucas_cache = SequenceCache::new(SequenceKind::Lucas);
        for t in 2..=200u64 {
            assert_eq!(lucas_cache.find_index(&lucas(t)), Some(t));
        }
        let pell_cache = SequenceCache::new(SequenceKind::Pell);
        for t in 0..=200u64 {
            assert_eq!(pell_cache.find_index(&pell(t)), Some(t));
        }
    }

    #[test]
    fn cache_matches_direct_recurrence() {
        let cache = SequenceCache::new(SequenceKind::Pell);
        for t in [0u64, 1, 5, 30, 11, 64] {
            assert_eq!(cache.get(t), pell(t));
        }
    }

    #[test]
    fn solution_tuple_checks_equation() {
        let good = SolutionTuple { r: 4, m: 2, n: 2, k: 1 };
        assert!(good.satisfies_equation(SequenceKind::Pell));
        let bad = SolutionTuple { r: 5, m: 2, n: 2, k: 1 };
        assert!(!bad.satisfies_equation(SequenceKind::Pell));
    }

    proptest! {
        // exact_valuation(b, b^e * c) == e whenever gcd(b, c) == 1.
        #[test]
        fn valuation_recovers_exponent(b in 2u64..40, c in 1u64..1000, e in 0u32..10) {
            let b_big = BigUint::from(b);
            let mut c = c;
            while num_integer::gcd(b as u128, c as u128) != 1 {
                c += 1;
            }
            let value = pow_uint(&b_big, e as u64) * BigUint::from(c);
            prop_assert_eq!(exact_valuation(&b_big, &value).unwrap(), e as u64);
        }
    }
}
