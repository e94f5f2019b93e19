//! Exhaustive verification over the final bounded boxes. Exact big-integer
//! arithmetic only; no floating point anywhere near the verdict.
//!
//! The grid loop runs over `(m, n, k)`; the index cap `r_cap` never bounds
//! the loop, it only sizes the membership table, so completeness does not
//! depend on any derived index inequality. A deliberately naive second
//! implementation ([`search_naive`]) re-derives the same list with fresh
//! enumeration and no prefilter, as an independent replay.

use crate::error::{Error, Result};
use crate::seq::{pow_uint, term, SequenceKind, SolutionTuple};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

/// The final certified box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBox {
    pub kind: SequenceKind,
    pub m_range: (u64, u64),
    pub n_range: (u64, u64),
    pub k_range: (u64, u64),
    /// Informational index cap; sizes the membership table only.
    pub r_cap: u64,
}

impl SearchBox {
    pub fn validate(&self) -> Result<()> {
        let ok = self.m_range.0 >= 2
            && self.n_range.0 >= 2
            && self.k_range.0 >= 1
            && self.m_range.0 <= self.m_range.1
            && self.n_range.0 <= self.n_range.1
            && self.k_range.0 <= self.k_range.1;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("degenerate search box: {self:?}")))
        }
    }

    pub fn tuple_count(&self) -> u64 {
        (self.m_range.1 - self.m_range.0 + 1)
            * (self.n_range.1 - self.n_range.0 + 1)
            * (self.k_range.1 - self.k_range.0 + 1)
    }
}

/// Residues a sequence attains modulo a small integer. Both recurrences are
/// invertible mod anything (the step matrix has determinant +-1 for Lucas
/// and -1 for Pell), so the residue sequence is purely periodic and one
/// period enumerates every attained class.
#[derive(Clone, Debug)]
pub struct ResidueTable {
    kind: SequenceKind,
    modulus: u64,
    present: Vec<bool>,
}

impl ResidueTable {
    pub fn new(kind: SequenceKind, modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::Domain("residue table: modulus must be >= 2".into()));
        }
        let (a0, b0) = match kind {
            SequenceKind::Lucas => (2 % modulus, 1 % modulus),
            SequenceKind::Pell => (0, 1 % modulus),
        };
        let step = |a: u64, b: u64| -> u64 {
            match kind {
                SequenceKind::Lucas => (a + b) % modulus,
                SequenceKind::Pell => (a + 2 * b % modulus) % modulus,
            }
        };
        let mut present = vec![false; modulus as usize];
        present[a0 as usize] = true;
        let (mut a, mut b) = (a0, b0);
        let cap = modulus
            .checked_mul(modulus)
            .and_then(|c| c.checked_add(2))
            .ok_or_else(|| Error::Domain("residue table: modulus too large".into()))?;
        for _ in 0..cap {
            present[b as usize] = true;
            let next = step(a, b);
            a = b;
            b = next;
            if (a, b) == (a0, b0) {
                return Ok(ResidueTable {
                    kind,
                    modulus,
                    present,
                });
            }
        }
        Err(Error::ScanDiverged(
            "residue period exceeded modulus^2".into(),
        ))
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Never a false negative: membership in the sequence implies `true`.
    pub fn admits(&self, value: &BigUint) -> bool {
        let r = value % BigUint::from(self.modulus);
        let r: u64 = r.try_into().expect("residue fits u64");
        self.present[r as usize]
    }
}

/// One-off prefilter query; builds the period table each call. Inside loops
/// construct a [`ResidueTable`] once instead.
pub fn residue_prefilter(value: &BigUint, kind: SequenceKind, modulus: u64) -> Result<bool> {
    Ok(ResidueTable::new(kind, modulus)?.admits(value))
}

/// Immutable sorted membership index built once per search.
struct MemberIndex {
    kind: SequenceKind,
    values: Vec<BigUint>,
}

impl MemberIndex {
    fn build(kind: SequenceKind, past: &BigUint) -> Self {
        let mut values = vec![term(kind, 0), term(kind, 1)];
        loop {
            let next = match kind {
                SequenceKind::Lucas => &values[values.len() - 2] + &values[values.len() - 1],
                SequenceKind::Pell => {
                    &values[values.len() - 2] + (&values[values.len() - 1] << 1)
                }
            };
            let done = &next > past;
            values.push(next);
            if done && values.len() >= 3 {
                break;
            }
        }
        MemberIndex { kind, values }
    }

    /// Smallest index holding `value`, if it is a sequence member.
    fn find(&self, value: &BigUint) -> Option<u64> {
        // Both sequences are strictly increasing from index 1; Lucas has the
        // non-monotone prefix 2, 1 handled explicitly.
        if self.kind == SequenceKind::Lucas && *value == BigUint::from(2u32) {
            return Some(0);
        }
        let tail = &self.values[1..];
        match tail.binary_search(value) {
            Ok(i) => Some((i + 1) as u64),
            Err(_) => {
                if self.kind == SequenceKind::Pell && value.is_zero() {
                    Some(0)
                } else {
                    None
                }
            }
        }
    }
}

/// Exhaustive search over the box. For every `(m, n, k)` the value
/// `W_m^{n+k} + W_m^n` is formed exactly and tested for membership; hits are
/// returned sorted by `(m, n, k)`. Residue prefilters, when supplied, only
/// skip values whose residue class the sequence never attains, so the
/// returned list is identical with or without them.
pub fn search(box_: &SearchBox, prefilter_moduli: &[u64]) -> Result<Vec<SolutionTuple>> {
    box_.validate()?;
    let kind = box_.kind;
    let tables: Vec<ResidueTable> = prefilter_moduli
        .iter()
        .map(|&m| ResidueTable::new(kind, m))
        .collect::<Result<Vec<_>>>()?;

    // Largest candidate value in the box sizes the membership index.
    let largest_base = term(kind, box_.m_range.1);
    let v_max = pow_uint(&largest_base, box_.n_range.1 + box_.k_range.1)
        + pow_uint(&largest_base, box_.n_range.1);
    let index = MemberIndex::build(kind, &v_max);

    let mut hits: Vec<SolutionTuple> = (box_.m_range.0..=box_.m_range.1)
        .into_par_iter()
        .map(|m| {
            let base = term(kind, m);
            let mut local = Vec::new();
            for n in box_.n_range.0..=box_.n_range.1 {
                let w_n = pow_uint(&base, n);
                let mut w_nk = pow_uint(&base, n + box_.k_range.0);
                for k in box_.k_range.0..=box_.k_range.1 {
                    let value = &w_nk + &w_n;
                    if tables.iter().all(|t| t.admits(&value)) {
                        if let Some(r) = index.find(&value) {
                            let tuple = SolutionTuple { r, m, n, k };
                            debug_assert!(tuple.satisfies_equation(kind));
                            // Exponent-bound admissibility used by the
                            // Matveev stage: n + k <= 2r on every hit.
                            debug_assert!(n + k <= 2 * r);
                            local.push(tuple);
                        }
                    }
                    w_nk *= &base;
                }
            }
            local
        })
        .flatten()
        .collect();
    hits.sort_by_key(|t| (t.m, t.n, t.k));
    Ok(hits)
}

/// Independently coded replay: plain nested loops, powers by repeated
/// multiplication, membership by fresh enumeration, no prefilter, no
/// parallelism. Kept intentionally separate from [`search`].
pub fn search_naive(box_: &SearchBox) -> Vec<SolutionTuple> {
    let (s0, s1, double): (u64, u64, bool) = match box_.kind {
        SequenceKind::Lucas => (2, 1, false),
        SequenceKind::Pell => (0, 1, true),
    };
    let mut hits = Vec::new();
    for m in box_.m_range.0..=box_.m_range.1 {
        // m-th term by direct recurrence.
        let mut a = BigUint::from(s0);
        let mut b = BigUint::from(s1);
        for _ in 1..m {
            let next = if double { &a + (&b << 1) } else { &a + &b };
            a = b;
            b = next;
        }
        let base = if m == 0 { a.clone() } else { b.clone() };
        for n in box_.n_range.0..=box_.n_range.1 {
            for k in box_.k_range.0..=box_.k_range.1 {
                let mut value = BigUint::one();
                for _ in 0..(n + k) {
                    value *= &base;
                }
                let mut small = BigUint::one();
                for _ in 0..n {
                    small *= &base;
                }
                value += small;
                // Fresh enumeration membership.
                let mut x = BigUint::from(s0);
                let mut y = BigUint::from(s1);
                let mut t = 0u64;
                let r = loop {
                    if x == value {
                        break Some(t);
                    }
                    if t >= 2 && x > value {
                        break None;
                    }
                    let next = if double { &x + (&y << 1) } else { &x + &y };
                    x = y;
                    y = next;
                    t += 1;
                };
                if let Some(r) = r {
                    hits.push(SolutionTuple { r, m, n, k });
                }
            }
        }
    }
    hits
}
