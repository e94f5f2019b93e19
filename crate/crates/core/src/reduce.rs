//! The Dujella-Petho reduction: given an irrational `delta`, a shift `mu`,
//! constants `C > 0`, `F > 1` and a bound `M` on `u`, walk the convergents of
//! `delta` for the first denominator `q > 6M` with
//! `epsilon = ||mu q|| - M ||delta q|| > 0`, certified; the reduced exponent
//! bound is then the largest integer below `ln(C q / epsilon)/ln F`.
//!
//! Everything here is an enclosure: `epsilon > 0` means its certified lower
//! endpoint is positive, and the exponent bound uses the upper endpoint of
//! the log ratio, so the reduction can only be weaker than exact, never
//! unsound.

use crate::cf::Expander;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::real::{ver_log, with_precision_retries, VerifiedReal};
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::One;
use std::cmp::Ordering;
use std::sync::Arc;

/// A real recomputable at any precision, shared across retries and threads.
pub type RealSourceFn = Arc<dyn Fn(u32) -> Result<VerifiedReal> + Send + Sync>;

/// One reduction problem `0 < |u delta - v + mu| < C F^{-omega}`, `u <= M`.
pub struct ReductionInstance {
    pub delta: RealSourceFn,
    pub mu: RealSourceFn,
    pub c: VerifiedReal,
    pub f: VerifiedReal,
    pub m_bound: BigUint,
}

impl ReductionInstance {
    /// Validates the lemma hypotheses `C > 0`, `F > 1`, `M >= 1` up front.
    pub fn new(
        delta: RealSourceFn,
        mu: RealSourceFn,
        c: VerifiedReal,
        f: VerifiedReal,
        m_bound: BigUint,
    ) -> Result<Self> {
        if c.lo().signum() <= 0 {
            return Err(Error::Domain("reduction: C must be certified > 0".into()));
        }
        if f.lo().cmp_int(&BigInt::one()) != Ordering::Greater {
            return Err(Error::Domain("reduction: F must be certified > 1".into()));
        }
        if m_bound < BigUint::one() {
            return Err(Error::Domain("reduction: M must be >= 1".into()));
        }
        Ok(ReductionInstance {
            delta,
            mu,
            c,
            f,
            m_bound,
        })
    }
}

/// Enclosure of the distance from `x` to the nearest integer.
///
/// Exact dyadic casework: the distance is 0 when an integer lies inside the
/// interval; it tops out at 1/2 when a half-integer does. A caller needing a
/// strict sign out of a straddling result raises precision and retries.
pub fn nearest_integer_distance(x: &VerifiedReal) -> VerifiedReal {
    let half = Dyadic::new(BigInt::one(), -1);
    let one = Dyadic::one();

    let dist = |d: &Dyadic| -> Dyadic {
        let frac = d.sub(&Dyadic::from_bigint(&d.floor_int()));
        let other = one.sub(&frac);
        if frac.cmp_value(&other) == Ordering::Greater {
            other
        } else {
            frac
        }
    };

    // Integer inside [lo, hi] iff ceil(lo) <= floor(hi).
    let contains_integer = x.lo().ceil_int() <= x.hi().floor_int();
    // Half-integer inside iff integer inside [lo - 1/2, hi - 1/2].
    let contains_half =
        x.lo().sub(&half).ceil_int() <= x.hi().sub(&half).floor_int();

    let d_lo = dist(x.lo());
    let d_hi = dist(x.hi());
    let lo = if contains_integer {
        Dyadic::zero()
    } else if d_lo.cmp_value(&d_hi) == Ordering::Less {
        d_lo.clone()
    } else {
        d_hi.clone()
    };
    let hi = if contains_half {
        half
    } else if d_lo.cmp_value(&d_hi) == Ordering::Greater {
        d_lo
    } else {
        d_hi
    };
    VerifiedReal::new(lo, hi, x.bits())
}

/// Outcome of one reduction: the chosen convergent, the certified epsilon,
/// and the reduced exponent bound.
#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub label: u64,
    pub convergent_index: usize,
    pub q: BigInt,
    pub epsilon: VerifiedReal,
    pub k_bound: u64,
    pub bits_used: u32,
}

/// Walks convergents of `delta` in index order; the first `q > 6M` (exact
/// integer comparison) with `epsilon > 0` (certified) wins. Convergents past
/// the threshold whose epsilon is certified negative are skipped, and an
/// undecidable epsilon escalates precision rather than guessing.
pub fn reduce(
    inst: &ReductionInstance,
    label: u64,
    bits: u32,
    scan_cap: usize,
) -> Result<ReductionResult> {
    let six_m = BigInt::from_biguint(Sign::Plus, &inst.m_bound * 6u32);
    let m_big = BigInt::from_biguint(Sign::Plus, inst.m_bound.clone());
    let delta: &crate::cf::RealSource<'_> = &*inst.delta;
    let mut expander = Expander::new(delta, &format!("reduction delta #{label}"), bits)?;

    for t in 0..scan_cap {
        let (_, q) = expander.convergent(t)?;
        if q <= six_m {
            continue;
        }
        // epsilon = ||mu q|| - M ||delta q||, certified sign.
        let verdict = with_precision_retries(
            expander.bits(),
            &format!("epsilon sign at convergent {t} of #{label}"),
            |w| {
                let d = (inst.delta)(w)?;
                let u = (inst.mu)(w)?;
                let eps = nearest_integer_distance(&u.mul_int(&q))
                    .sub(&nearest_integer_distance(&d.mul_int(&q)).mul_int(&m_big));
                if eps.lo().signum() > 0 {
                    Ok(Some((true, eps, w)))
                } else if eps.hi().signum() < 0 {
                    Ok(Some((false, eps, w)))
                } else {
                    Ok(None)
                }
            },
        )?;
        let (positive, epsilon, bits_used) = verdict;
        if !positive {
            continue;
        }
        let k_bound = exclusion_bound(&inst.c, &inst.f, &q, &epsilon, bits_used)?;
        return Ok(ReductionResult {
            label,
            convergent_index: t,
            q,
            epsilon,
            k_bound,
            bits_used,
        });
    }
    Err(Error::NoQualifyingConvergent {
        label: format!("#{label}"),
        scanned: scan_cap,
    })
}

/// Largest integer omega NOT excluded by the lemma, i.e. strictly below the
/// certified upper endpoint of `ln(C q / epsilon)/ln F`.
pub fn exclusion_bound(
    c: &VerifiedReal,
    f: &VerifiedReal,
    q: &BigInt,
    epsilon: &VerifiedReal,
    bits: u32,
) -> Result<u64> {
    let ratio = c.mul_int(q).div(epsilon)?;
    let value = ver_log(&ratio, bits)?.div(&ver_log(f, bits)?)?;
    // Excluded: omega >= value. Survivors: omega < value <= upper endpoint.
    let bound: BigInt = value.hi().ceil_int() - 1;
    bound
        .to_biguint()
        .and_then(|b| b.try_into().ok())
        .ok_or_else(|| Error::Domain("exclusion bound out of range".into()))
}

/// Aggregates of one reduction pass over a family of instances, combined the
/// conservative way: the global exponent bound pairs the largest chosen `q`
/// with the smallest certified epsilon, which dominates every per-instance
/// bound.
#[derive(Clone, Debug)]
pub struct PassAggregates {
    pub max_q: BigInt,
    pub argmax_label: u64,
    pub min_epsilon_lo: Dyadic,
    pub k_bound: u64,
}

pub fn aggregate_pass(
    results: &[ReductionResult],
    c: &VerifiedReal,
    f: &VerifiedReal,
    bits: u32,
) -> Result<PassAggregates> {
    if results.is_empty() {
        return Err(Error::Domain("aggregate_pass: empty pass".into()));
    }
    let mut max_q = &results[0].q;
    let mut argmax_label = results[0].label;
    let mut min_eps = results[0].epsilon.lo().clone();
    for r in results {
        if r.q > *max_q {
            max_q = &r.q;
            argmax_label = r.label;
        }
        if r.epsilon.lo().cmp_value(&min_eps) == Ordering::Less {
            min_eps = r.epsilon.lo().clone();
        }
    }
    let eps_point = VerifiedReal::point(min_eps.clone(), bits);
    let k_bound = exclusion_bound(c, f, max_q, &eps_point, bits)?;
    Ok(PassAggregates {
        max_q: max_q.clone(),
        argmax_label,
        min_epsilon_lo: min_eps,
        k_bound,
    })
}
