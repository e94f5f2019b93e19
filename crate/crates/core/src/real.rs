//! Verified real arithmetic: intervals with exact dyadic endpoints and
//! outward rounding.
//!
//! Every value is an enclosure `[lo, hi]` guaranteed to contain the exact
//! real it stands for. Operations only ever widen enclosures, so any strict
//! comparison that resolves to `Less` or `Greater` is a theorem about the
//! exact values. `Overlapping` means "not enough precision", and callers are
//! expected to retry at doubled precision (see [`with_precision_retries`]).
//!
//! The logarithm reduces its argument to `[3/4, 3/2]` and sums the arctanh
//! series `ln f = 2 * sum y^(2i+1)/(2i+1)` with `y = (f-1)/(f+1)`, carrying
//! an explicit tail bound, so containment is unconditional rather than a
//! rounding-error estimate.

use crate::dyadic::{Direction, Dyadic};
use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

/// Default working precision of the whole pipeline. The deepest convergent
/// denominator needed is about 2^80, so 192 bits leave a wide margin.
pub const DEFAULT_PRECISION_BITS: u32 = 192;

/// Retry cap: precision may double this many times before an operation gives
/// up, which turns a silent wrong answer into a loud failure.
pub const MAX_PRECISION_DOUBLINGS: u32 = 16;

/// Endpoints carry this many bits beyond the advertised precision so that
/// chained operations do not eat into the guaranteed width.
const GUARD_BITS: u32 = 32;

fn working(bits: u32) -> u32 {
    bits.saturating_add(GUARD_BITS)
}

/// Rounding request for [`VerifiedReal::round_to`]. `Outward` widens both
/// endpoints (the default for enclosures); the directed variants collapse the
/// interval onto one rounded endpoint and exist for extracting conservative
/// scalars.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Outward,
    TowardLower,
    TowardUpper,
}

/// Verdict of an interval comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalCmp {
    Less,
    Greater,
    Overlapping,
}

/// Arithmetic operation selector for [`ver_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// An interval `[lo, hi]` of exact dyadic rationals enclosing one real value.
///
/// Invariants: `lo <= hi`, and the exact value the interval stands for lies
/// inside. `bits` records the precision the value was requested at; fresh
/// constructor outputs satisfy `hi - lo <= 2^-bits * max(1, |lo|)`.
#[derive(Clone, PartialEq, Eq)]
pub struct VerifiedReal {
    lo: Dyadic,
    hi: Dyadic,
    bits: u32,
}

impl VerifiedReal {
    pub fn new(lo: Dyadic, hi: Dyadic, bits: u32) -> Self {
        assert!(
            lo.cmp_value(&hi) != Ordering::Greater,
            "inverted interval: [{}, {}]",
            lo,
            hi
        );
        VerifiedReal { lo, hi, bits }
    }

    /// Exact point interval.
    pub fn point(value: Dyadic, bits: u32) -> Self {
        VerifiedReal {
            lo: value.clone(),
            hi: value,
            bits,
        }
    }

    pub fn from_i64(n: i64, bits: u32) -> Self {
        Self::point(Dyadic::from_i64(n), bits)
    }

    pub fn from_bigint(n: &BigInt, bits: u32) -> Self {
        Self::point(Dyadic::from_bigint(n), bits)
    }

    pub fn from_biguint(n: &BigUint, bits: u32) -> Self {
        Self::point(Dyadic::from_biguint(n), bits)
    }

    /// Tight enclosure of the rational `num/den` (`den != 0`).
    pub fn from_ratio(num: &BigInt, den: &BigInt, bits: u32) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Domain("from_ratio: zero denominator".into()));
        }
        let (num, den) = if den.sign() == Sign::Minus {
            (-num, -den.clone())
        } else {
            (num.clone(), den.clone())
        };
        let n = Dyadic::from_bigint(&num);
        let d = Dyadic::from_bigint(&den);
        let w = working(bits);
        Ok(VerifiedReal::new(
            n.div(&d, w, Direction::Down),
            n.div(&d, w, Direction::Up),
            bits,
        ))
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Exact width `hi - lo`.
    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.lo.signum() > 0
    }

    pub fn is_strictly_negative(&self) -> bool {
        self.hi.signum() < 0
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    /// Largest magnitude endpoint, as an upper bound for `|x|`.
    pub fn abs_upper(&self) -> Dyadic {
        let a = self.lo.abs();
        let b = self.hi.abs();
        if a.cmp_value(&b) == Ordering::Greater {
            a
        } else {
            b
        }
    }

    pub fn round_to(&self, bits: u32, rounding: Rounding) -> VerifiedReal {
        let w = working(bits);
        match rounding {
            Rounding::Outward => VerifiedReal::new(
                self.lo.round(w, Direction::Down),
                self.hi.round(w, Direction::Up),
                bits,
            ),
            Rounding::TowardLower => {
                VerifiedReal::point(self.lo.round(w, Direction::Down), bits)
            }
            Rounding::TowardUpper => {
                VerifiedReal::point(self.hi.round(w, Direction::Up), bits)
            }
        }
    }

    /// Smallest interval containing both arguments.
    pub fn hull(a: &VerifiedReal, b: &VerifiedReal) -> VerifiedReal {
        let lo = if a.lo.cmp_value(&b.lo) == Ordering::Less {
            a.lo.clone()
        } else {
            b.lo.clone()
        };
        let hi = if a.hi.cmp_value(&b.hi) == Ordering::Greater {
            a.hi.clone()
        } else {
            b.hi.clone()
        };
        VerifiedReal::new(lo, hi, a.bits.min(b.bits))
    }

    /// Symmetric widening by `margin >= 0` on both sides.
    pub fn widen(&self, margin: &Dyadic) -> VerifiedReal {
        debug_assert!(margin.signum() >= 0);
        VerifiedReal::new(self.lo.sub(margin), self.hi.add(margin), self.bits)
    }

    pub fn neg(&self) -> VerifiedReal {
        VerifiedReal::new(self.hi.neg(), self.lo.neg(), self.bits)
    }

    pub fn abs(&self) -> VerifiedReal {
        if self.lo.signum() >= 0 {
            self.clone()
        } else if self.hi.signum() <= 0 {
            self.neg()
        } else {
            VerifiedReal::new(Dyadic::zero(), self.abs_upper(), self.bits)
        }
    }

    pub fn add(&self, other: &VerifiedReal) -> VerifiedReal {
        let bits = self.bits.max(other.bits);
        let w = working(bits);
        VerifiedReal::new(
            self.lo.add(&other.lo).round(w, Direction::Down),
            self.hi.add(&other.hi).round(w, Direction::Up),
            bits,
        )
    }

    pub fn sub(&self, other: &VerifiedReal) -> VerifiedReal {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &VerifiedReal) -> VerifiedReal {
        let bits = self.bits.max(other.bits);
        let w = working(bits);
        // All four endpoint products; exact, so min/max are certain.
        let products = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let mut lo = products[0].clone();
        let mut hi = products[0].clone();
        for p in &products[1..] {
            if p.cmp_value(&lo) == Ordering::Less {
                lo = p.clone();
            }
            if p.cmp_value(&hi) == Ordering::Greater {
                hi = p.clone();
            }
        }
        VerifiedReal::new(
            lo.round(w, Direction::Down),
            hi.round(w, Direction::Up),
            bits,
        )
    }

    /// Division; the divisor interval must exclude zero.
    pub fn div(&self, other: &VerifiedReal) -> Result<VerifiedReal> {
        if other.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let bits = self.bits.max(other.bits);
        let w = working(bits);
        // Quotient extrema occur at endpoint combinations; compute each with
        // both roundings and take the certified min/max.
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let mut lo: Option<Dyadic> = None;
        let mut hi: Option<Dyadic> = None;
        for (n, d) in pairs {
            let down = n.div(d, w, Direction::Down);
            let up = n.div(d, w, Direction::Up);
            lo = Some(match lo {
                None => down,
                Some(cur) => {
                    if down.cmp_value(&cur) == Ordering::Less {
                        down
                    } else {
                        cur
                    }
                }
            });
            hi = Some(match hi {
                None => up,
                Some(cur) => {
                    if up.cmp_value(&cur) == Ordering::Greater {
                        up
                    } else {
                        cur
                    }
                }
            });
        }
        Ok(VerifiedReal::new(lo.unwrap(), hi.unwrap(), bits))
    }

    /// Exact scaling by an integer (then one outward rounding).
    pub fn mul_int(&self, n: &BigInt) -> VerifiedReal {
        let w = working(self.bits);
        let a = self.lo.mul_int(n);
        let b = self.hi.mul_int(n);
        let (lo, hi) = if n.sign() == Sign::Minus { (b, a) } else { (a, b) };
        VerifiedReal::new(
            lo.round(w, Direction::Down),
            hi.round(w, Direction::Up),
            self.bits,
        )
    }

    pub fn mul_uint(&self, n: &BigUint) -> VerifiedReal {
        self.mul_int(&BigInt::from_biguint(Sign::Plus, n.clone()))
    }

    /// Exact shift by an integer offset (no rounding).
    pub fn add_int(&self, n: &BigInt) -> VerifiedReal {
        let d = Dyadic::from_bigint(n);
        VerifiedReal::new(self.lo.add(&d), self.hi.add(&d), self.bits)
    }

    /// Exact multiplication by `2^k` (no rounding).
    pub fn mul_pow2(&self, k: i64) -> VerifiedReal {
        VerifiedReal::new(self.lo.mul_pow2(k), self.hi.mul_pow2(k), self.bits)
    }

    /// Interval power by repeated squaring (exponent is small everywhere in
    /// this pipeline).
    pub fn powi(&self, e: u32) -> VerifiedReal {
        let mut result = VerifiedReal::from_i64(1, self.bits);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Certified comparison of enclosures. `Less` and `Greater` are theorems
    /// about the exact values; `Overlapping` asks the caller for precision.
    pub fn compare(&self, other: &VerifiedReal) -> IntervalCmp {
        if self.hi.cmp_value(&other.lo) == Ordering::Less {
            IntervalCmp::Less
        } else if self.lo.cmp_value(&other.hi) == Ordering::Greater {
            IntervalCmp::Greater
        } else {
            IntervalCmp::Overlapping
        }
    }

    pub fn compare_int(&self, n: &BigInt) -> IntervalCmp {
        let d = Dyadic::from_bigint(n);
        if self.hi.cmp_value(&d) == Ordering::Less {
            IntervalCmp::Less
        } else if self.lo.cmp_value(&d) == Ordering::Greater {
            IntervalCmp::Greater
        } else {
            IntervalCmp::Overlapping
        }
    }

    /// Certified floor: both endpoints must agree on it.
    pub fn floor_certified(&self) -> Option<BigInt> {
        let f_lo = self.lo.floor_int();
        let f_hi = self.hi.floor_int();
        if f_lo == f_hi {
            Some(f_lo)
        } else {
            None
        }
    }

    /// True if the exact dyadic `d` lies inside the enclosure.
    pub fn contains_dyadic(&self, d: &Dyadic) -> bool {
        self.lo.cmp_value(d) != Ordering::Greater && self.hi.cmp_value(d) != Ordering::Less
    }

    /// True if `other` is contained in `self`.
    pub fn contains_interval(&self, other: &VerifiedReal) -> bool {
        self.lo.cmp_value(&other.lo) != Ordering::Greater
            && self.hi.cmp_value(&other.hi) != Ordering::Less
    }
}

impl fmt::Debug for VerifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]@{}", self.lo, self.hi, self.bits)
    }
}

impl fmt::Display for VerifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Applies `op` to the pair of enclosures.
pub fn ver_arith(a: &VerifiedReal, b: &VerifiedReal, op: ArithOp) -> Result<VerifiedReal> {
    match op {
        ArithOp::Add => Ok(a.add(b)),
        ArithOp::Sub => Ok(a.sub(b)),
        ArithOp::Mul => Ok(a.mul(b)),
        ArithOp::Div => a.div(b),
    }
}

/// Certified comparison, free-function spelling.
pub fn ver_compare(a: &VerifiedReal, b: &VerifiedReal) -> IntervalCmp {
    a.compare(b)
}

/// Enclosure of `sqrt(x)` for a nonnegative integer `x`, with width at most
/// `2^-(bits+2)`. Perfect squares come back as exact points.
pub fn ver_sqrt(x: &BigUint, bits: u32) -> VerifiedReal {
    if x.is_zero() {
        return VerifiedReal::point(Dyadic::zero(), bits);
    }
    let t = working(bits) as u64 + 2;
    let scaled = x << (2 * t);
    let root = scaled.sqrt(); // floor square root
    let exact = &root * &root == scaled;
    let lo = Dyadic::new(BigInt::from_biguint(Sign::Plus, root.clone()), -(t as i64));
    if exact {
        return VerifiedReal::point(lo, bits);
    }
    let hi = Dyadic::new(
        BigInt::from_biguint(Sign::Plus, root + 1u32),
        -(t as i64),
    );
    VerifiedReal::new(lo, hi, bits)
}

/// Sum of the arctanh series at `y`, with a certified tail bound. Requires
/// `|y| < 1/2` (all call sites keep `|y| <= 1/3`).
fn atanh_series(y: &VerifiedReal, w: u32) -> VerifiedReal {
    let y2 = y.mul(y);
    let y2_hi = y2.hi().clone();
    debug_assert!(
        y2_hi.cmp_ratio(&BigInt::from(1), &BigInt::from(4)) == Ordering::Less,
        "atanh series argument too large"
    );
    let threshold = Dyadic::new(BigInt::from(1), -(w as i64) - 4);
    let mut sum = y.clone();
    let mut power = y.clone();
    let mut k: u32 = 1;
    loop {
        power = power.mul(&y2);
        let denom = VerifiedReal::from_i64((2 * k + 1) as i64, w);
        let term = power.div(&denom).expect("odd denominator is nonzero");
        sum = sum.add(&term);
        k += 1;
        let mag = power.abs_upper();
        if mag.cmp_value(&threshold) == Ordering::Less {
            // Remaining terms are dominated by the geometric series
            // |power| * y2 / (1 - y2) starting at the next power.
            let num = mag.mul(&y2_hi);
            let den = Dyadic::one().sub(&y2_hi);
            let tail = num.div(&den, w, Direction::Up);
            return sum.widen(&tail);
        }
        assert!(k < 10 * w + 64, "arctanh series failed to converge");
    }
}

static LN2_CACHE: Mutex<BTreeMap<u32, (Dyadic, Dyadic)>> = Mutex::new(BTreeMap::new());

/// Enclosure of `ln 2 = 2 * arctanh(1/3)`, memoized per working precision.
pub fn ln2(bits: u32) -> VerifiedReal {
    let w = working(bits);
    if let Some((lo, hi)) = LN2_CACHE.lock().unwrap().get(&w) {
        return VerifiedReal::new(lo.clone(), hi.clone(), bits);
    }
    let third =
        VerifiedReal::from_ratio(&BigInt::from(1), &BigInt::from(3), w).expect("den nonzero");
    let value = atanh_series(&third, w + 8).mul_pow2(1);
    LN2_CACHE
        .lock()
        .unwrap()
        .insert(w, (value.lo().clone(), value.hi().clone()));
    VerifiedReal::new(value.lo().clone(), value.hi().clone(), bits)
}

/// Enclosure of `ln d` for an exact positive dyadic.
fn ln_dyadic(d: &Dyadic, bits: u32) -> VerifiedReal {
    assert!(d.signum() > 0, "ln of a nonpositive dyadic");
    if d.cmp_value(&Dyadic::one()) == Ordering::Equal {
        return VerifiedReal::point(Dyadic::zero(), bits);
    }
    let w = working(bits);
    // d = f * 2^s with f in [3/4, 3/2].
    let mut s = d.msb_pos().expect("nonzero");
    let mut f = d.mul_pow2(-s); // f in [1, 2)
    if f.cmp_ratio(&BigInt::from(3), &BigInt::from(2)) == Ordering::Greater {
        f = f.mul_pow2(-1);
        s += 1;
    }
    // y = (f - 1)/(f + 1) lies in [-1/7, 1/5].
    let one = Dyadic::one();
    let num = VerifiedReal::point(f.sub(&one), w);
    let den = VerifiedReal::point(f.add(&one), w);
    let y = num.div(&den).expect("f + 1 > 0");
    let ln_f = atanh_series(&y, w).mul_pow2(1);
    if s == 0 {
        return VerifiedReal::new(ln_f.lo().clone(), ln_f.hi().clone(), bits);
    }
    let shift = ln2(w).mul_int(&BigInt::from(s));
    let total = ln_f.add(&shift);
    VerifiedReal::new(total.lo().clone(), total.hi().clone(), bits)
}

/// Enclosure of the natural logarithm of every point of `x`; requires
/// `x.lo > 0`. Monotonicity makes the endpoint images an enclosure.
pub fn ver_log(x: &VerifiedReal, bits: u32) -> Result<VerifiedReal> {
    if x.lo().signum() <= 0 {
        return Err(Error::Domain(format!(
            "ver_log: interval {} touches zero or negative values",
            x
        )));
    }
    let lo_img = ln_dyadic(x.lo(), bits);
    let hi_img = ln_dyadic(x.hi(), bits);
    Ok(VerifiedReal::new(
        lo_img.lo().clone(),
        hi_img.hi().clone(),
        bits,
    ))
}

/// Enclosure of `ln n` for a positive integer.
pub fn ln_uint(n: &BigUint, bits: u32) -> Result<VerifiedReal> {
    if n.is_zero() {
        return Err(Error::Domain("ln_uint: zero argument".into()));
    }
    Ok(ln_dyadic(&Dyadic::from_biguint(n), bits))
}

// Algebraic constants of the two Binet forms, constructed on demand at any
// precision. The golden ratio and its conjugate solve x^2 = x + 1; the
// silver ratio 1 + sqrt(2) and its conjugate solve x^2 = 2x + 1.

/// `(1 + sqrt 5)/2`.
pub fn golden_ratio(bits: u32) -> VerifiedReal {
    ver_sqrt(&BigUint::from(5u32), working(bits))
        .add_int(&BigInt::from(1))
        .mul_pow2(-1)
        .round_to(bits, Rounding::Outward)
}

/// `(sqrt 5 - 1)/2`, the absolute value of the golden ratio conjugate.
pub fn golden_conjugate_abs(bits: u32) -> VerifiedReal {
    ver_sqrt(&BigUint::from(5u32), working(bits))
        .add_int(&BigInt::from(-1))
        .mul_pow2(-1)
        .round_to(bits, Rounding::Outward)
}

/// `1 + sqrt 2`.
pub fn silver_ratio(bits: u32) -> VerifiedReal {
    ver_sqrt(&BigUint::from(2u32), working(bits))
        .add_int(&BigInt::from(1))
        .round_to(bits, Rounding::Outward)
}

/// `sqrt 2 - 1`, the absolute value of the silver ratio conjugate.
pub fn silver_conjugate_abs(bits: u32) -> VerifiedReal {
    ver_sqrt(&BigUint::from(2u32), working(bits))
        .add_int(&BigInt::from(-1))
        .round_to(bits, Rounding::Outward)
}

/// `2 * sqrt 2`.
pub fn two_sqrt_two(bits: u32) -> VerifiedReal {
    ver_sqrt(&BigUint::from(2u32), working(bits))
        .mul_pow2(1)
        .round_to(bits, Rounding::Outward)
}

/// `ln((1 + sqrt 5)/2)`.
pub fn ln_golden(bits: u32) -> VerifiedReal {
    ver_log(&golden_ratio(working(bits)), bits).expect("golden ratio is positive")
}

/// `ln(1 + sqrt 2)`.
pub fn ln_silver(bits: u32) -> VerifiedReal {
    ver_log(&silver_ratio(working(bits)), bits).expect("silver ratio is positive")
}

/// `ln(2 sqrt 2) = (3/2) ln 2`, computed through the exact identity.
pub fn ln_two_sqrt_two(bits: u32) -> VerifiedReal {
    ln2(bits).mul_int(&BigInt::from(3)).mul_pow2(-1)
}

/// Runs `attempt` at `base_bits`, doubling the precision whenever it reports
/// `Ok(None)` (indeterminate), up to [`MAX_PRECISION_DOUBLINGS`] times.
pub fn with_precision_retries<T>(
    base_bits: u32,
    context: &str,
    mut attempt: impl FnMut(u32) -> Result<Option<T>>,
) -> Result<T> {
    let mut bits = base_bits;
    for _ in 0..=MAX_PRECISION_DOUBLINGS {
        if let Some(value) = attempt(bits)? {
            return Ok(value);
        }
        bits = bits.saturating_mul(2);
    }
    Err(Error::PrecisionExhausted {
        bits,
        doublings: MAX_PRECISION_DOUBLINGS,
        context: context.to_string(),
    })
}
