//! Certified continued-fraction expansion of verified reals, convergent
//! enumeration, and the two halves of Legendre's convergent criterion.
//!
//! A partial quotient is accepted only when both interval endpoints agree on
//! the floor, so an accepted quotient can never be wrong; insufficient
//! precision restarts the expansion at doubled precision from a freshly
//! evaluated source. On top of that, [`expand_until`] re-runs the whole
//! expansion at twice the final precision and demands identical quotients,
//! recording the precision as a stability witness.

use crate::error::{Error, Result};
use crate::real::{IntervalCmp, VerifiedReal, MAX_PRECISION_DOUBLINGS};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// A recomputable real: evaluates to an enclosure at any requested precision.
pub type RealSource<'a> = dyn Fn(u32) -> Result<VerifiedReal> + Sync + 'a;

/// Finished expansion: partial quotients `a_0..a_N`, convergents `p_i/q_i`,
/// and the precision at which the quotients were confirmed stable.
///
/// Indexing: convergent `i` uses quotients `a_0..a_i`, with the classical
/// seeds `p_{-1} = 1, q_{-1} = 0`, so `p_0 = a_0` and `q_0 = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub quotients: Vec<BigInt>,
    pub convergents: Vec<(BigInt, BigInt)>,
    pub stable_at_bits: u32,
}

/// The data Legendre's lower bound needs: the threshold `S`, the first index
/// `N` with `q_N > S`, and `J = max(a_0..a_N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegendreGate {
    pub threshold: BigInt,
    pub crossing_index: usize,
    pub max_quotient: BigInt,
}

/// Incremental certified expander. Quotients and convergents, once produced,
/// are exact integers; only the tail enclosure depends on precision.
pub struct Expander<'a> {
    source: &'a RealSource<'a>,
    label: String,
    bits: u32,
    doublings_used: u32,
    tail: VerifiedReal,
    quotients: Vec<BigInt>,
    convergents: Vec<(BigInt, BigInt)>,
}

impl<'a> Expander<'a> {
    pub fn new(source: &'a RealSource<'a>, label: &str, bits: u32) -> Result<Self> {
        let tail = source(bits)?;
        Ok(Expander {
            source,
            label: label.to_string(),
            bits,
            doublings_used: 0,
            tail,
            quotients: Vec::new(),
            convergents: Vec::new(),
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn quotients(&self) -> &[BigInt] {
        &self.quotients
    }

    pub fn convergents(&self) -> &[(BigInt, BigInt)] {
        &self.convergents
    }

    /// Doubles precision, re-evaluates the source, and replays the already
    /// certified quotients to rebuild the tail enclosure.
    fn escalate(&mut self) -> Result<()> {
        if self.doublings_used >= MAX_PRECISION_DOUBLINGS {
            return Err(Error::PrecisionExhausted {
                bits: self.bits,
                doublings: self.doublings_used,
                context: format!(
                    "continued fraction of {} stalled at quotient {}",
                    self.label,
                    self.quotients.len()
                ),
            });
        }
        self.doublings_used += 1;
        self.bits = self.bits.saturating_mul(2);
        let mut tail = (self.source)(self.bits)?;
        for a in &self.quotients {
            let frac = tail.add_int(&-a);
            if frac.lo().signum() <= 0 {
                // Even the doubled precision cannot separate the tail from
                // its floor yet; the caller will escalate again.
                self.tail = frac;
                return Ok(());
            }
            tail = VerifiedReal::from_i64(1, self.bits).div(&frac)?;
        }
        self.tail = tail;
        Ok(())
    }

    /// Produces one more certified partial quotient and convergent.
    fn step(&mut self) -> Result<()> {
        loop {
            if let Some(a) = self.tail.floor_certified() {
                let frac = self.tail.add_int(&-&a);
                if frac.lo().signum() > 0 {
                    let recip = VerifiedReal::from_i64(1, self.bits).div(&frac)?;
                    self.push_quotient(a);
                    self.tail = recip;
                    return Ok(());
                }
                // The interval floor is certain but the fractional part still
                // touches zero from above; more precision needed.
            }
            self.escalate()?;
        }
    }

    fn push_quotient(&mut self, a: BigInt) {
        let n = self.convergents.len();
        let (p_prev, q_prev) = if n >= 1 {
            self.convergents[n - 1].clone()
        } else {
            (BigInt::one(), BigInt::zero())
        };
        let (p_prev2, q_prev2) = if n >= 2 {
            self.convergents[n - 2].clone()
        } else if n == 1 {
            (BigInt::one(), BigInt::zero())
        } else {
            (BigInt::zero(), BigInt::one())
        };
        let p = &a * &p_prev + &p_prev2;
        let q = &a * &q_prev + &q_prev2;
        self.quotients.push(a);
        self.convergents.push((p, q));
    }

    /// Extends the expansion until convergent `i` exists and returns it.
    pub fn convergent(&mut self, i: usize) -> Result<(BigInt, BigInt)> {
        while self.convergents.len() <= i {
            self.step()?;
        }
        Ok(self.convergents[i].clone())
    }
}

/// Expands `x` out to the first convergent denominator exceeding `threshold`,
/// with a doubled-precision stability witness, and packages the Legendre
/// gate data.
pub fn expand_until(
    source: &RealSource<'_>,
    label: &str,
    threshold: &BigInt,
    bits: u32,
) -> Result<(ContinuedFraction, LegendreGate)> {
    if threshold.sign() != num_bigint::Sign::Plus {
        return Err(Error::Domain("expand_until: threshold must be >= 1".into()));
    }
    let crossing = |exp: &mut Expander<'_>| -> Result<usize> {
        let mut i = 0usize;
        loop {
            let (_, q) = exp.convergent(i)?;
            if &q > threshold {
                return Ok(i);
            }
            i += 1;
        }
    };

    let mut first = Expander::new(source, label, bits)?;
    let n = crossing(&mut first)?;
    let stable_at_bits = first.bits();

    // Stability witness: a fresh expansion at twice the precision must agree
    // on every quotient up to the crossing.
    let mut second = Expander::new(source, label, stable_at_bits.saturating_mul(2))?;
    let n2 = crossing(&mut second)?;
    if n2 != n || second.quotients()[..=n] != first.quotients()[..=n] {
        return Err(Error::Stage {
            stage: format!("expand_until({label})"),
            message: "stability witness failed: quotients changed under doubled precision".into(),
        });
    }

    let quotients: Vec<BigInt> = first.quotients()[..=n].to_vec();
    let convergents: Vec<(BigInt, BigInt)> = first.convergents()[..=n].to_vec();
    let max_quotient = quotients.iter().max().cloned().expect("nonempty");
    Ok((
        ContinuedFraction {
            quotients,
            convergents,
            stable_at_bits,
        },
        LegendreGate {
            threshold: threshold.clone(),
            crossing_index: n,
            max_quotient,
        },
    ))
}

/// Certified test of `|x - p/q| < 1/(2 q^2)`, the hypothesis under which
/// `p/q` must be a convergent of `x`. Exact up to the width of `x` itself:
/// the decision compares `|x q - p| * 2q` against 1.
pub fn legendre_is_convergent(x: &VerifiedReal, p: &BigInt, q: &BigInt) -> Result<bool> {
    if q.sign() != num_bigint::Sign::Plus {
        return Err(Error::Domain("legendre_is_convergent: q must be >= 1".into()));
    }
    let t = x.mul_int(q).add_int(&-p).abs();
    let scaled = t.mul_int(&(q << 1));
    match scaled.compare_int(&BigInt::one()) {
        IntervalCmp::Less => Ok(true),
        IntervalCmp::Greater => Ok(false),
        IntervalCmp::Overlapping => Err(Error::Indeterminate {
            bits: x.bits(),
            context: format!("legendre_is_convergent at p/q = {p}/{q}"),
        }),
    }
}

/// The Legendre lower bound `1/((J + 2) q^2)` for denominators `q <= S`,
/// as an exact rational enclosure.
pub fn legendre_lower_bound(gate: &LegendreGate, q: &BigInt, bits: u32) -> Result<VerifiedReal> {
    if q.sign() != num_bigint::Sign::Plus {
        return Err(Error::Domain("legendre_lower_bound: q must be >= 1".into()));
    }
    if q > &gate.threshold {
        return Err(Error::Domain(format!(
            "legendre_lower_bound: q = {q} exceeds the gate threshold {}",
            gate.threshold
        )));
    }
    let denom = (&gate.max_quotient + 2) * q * q;
    VerifiedReal::from_ratio(&BigInt::one(), &denom, bits)
}
