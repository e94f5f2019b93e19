//! Exact dyadic rationals `mantissa * 2^exponent`, the endpoint type of the
//! verified intervals.
//!
//! Dyadics are closed under addition, subtraction and multiplication, so the
//! only operations that ever lose information are division and the explicit
//! `round` calls, and both take a rounding [`Direction`]. That is what makes
//! outward rounding of interval endpoints a constant-time decision instead of
//! an error analysis.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Rounding direction for lossy operations. `Down` is toward negative
/// infinity, `Up` toward positive infinity, matching what the lower and upper
/// endpoint of an enclosure respectively need.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Down,
    Up,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Down => Direction::Up,
            Direction::Up => Direction::Down,
        }
    }
}

/// An exact dyadic rational.
///
/// Canonical form: the mantissa is odd or zero, and zero is stored with
/// exponent 0, so structural equality coincides with value equality.
#[derive(Clone, PartialEq, Eq)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mant: BigInt::from(1),
            exp: 0,
        }
    }

    /// Builds `mant * 2^exp` and normalizes.
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    pub fn from_bigint(n: &BigInt) -> Self {
        Dyadic::new(n.clone(), 0)
    }

    pub fn from_biguint(n: &BigUint) -> Self {
        Dyadic::new(BigInt::from_biguint(Sign::Plus, n.clone()), 0)
    }

    pub fn from_i64(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn mant(&self) -> &BigInt {
        &self.mant
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Number of significant bits of the mantissa (0 for zero).
    pub fn bit_count(&self) -> u64 {
        self.mant.bits()
    }

    /// Position of the most significant bit: `|x| in [2^p, 2^{p+1})`.
    /// `None` for zero.
    pub fn msb_pos(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mant.bits() as i64 - 1 + self.exp)
        }
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic {
            mant: -self.mant.clone(),
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    /// Exact sum.
    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        Dyadic::new(a + b, e)
    }

    /// Exact difference.
    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    /// Exact product.
    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    pub fn mul_int(&self, n: &BigInt) -> Dyadic {
        Dyadic::new(&self.mant * n, self.exp)
    }

    /// Keeps at most `prec` significant mantissa bits, rounding in `dir`.
    /// Exact values with short mantissas are returned unchanged.
    pub fn round(&self, prec: u32, dir: Direction) -> Dyadic {
        let nbits = self.mant.bits();
        if nbits <= prec as u64 {
            return self.clone();
        }
        let drop = (nbits - prec as u64) as i64;
        let mant = match dir {
            // BigInt shr is an arithmetic shift: floor division by 2^drop.
            Direction::Down => &self.mant >> drop as u64,
            Direction::Up => -(&(-&self.mant) >> drop as u64),
        };
        Dyadic::new(mant, self.exp + drop)
    }

    /// Directed division `self / den` with a `prec`-bit quotient mantissa.
    /// `den` must be nonzero.
    pub fn div(&self, den: &Dyadic, prec: u32, dir: Direction) -> Dyadic {
        assert!(!den.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let la = self.mant.bits();
        let lb = den.mant.bits();
        // Scale so the integer quotient carries prec + 2 significant bits.
        let shift = (lb + prec as u64 + 2).saturating_sub(la);
        let num = &self.mant << shift;
        let (q, r) = num.div_mod_floor(&den.mant);
        // div_mod_floor gives the floor of the exact quotient; bump for Up.
        let q = match dir {
            Direction::Down => q,
            Direction::Up => {
                if r.is_zero() {
                    q
                } else {
                    q + 1
                }
            }
        };
        Dyadic::new(q, self.exp - den.exp - shift as i64).round(prec, dir)
    }

    /// Floor as an exact integer.
    pub fn floor_int(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            &self.mant >> (-self.exp) as u64
        }
    }

    /// Ceiling as an exact integer.
    pub fn ceil_int(&self) -> BigInt {
        -self.neg().floor_int()
    }

    pub fn cmp_value(&self, other: &Dyadic) -> Ordering {
        let sa = self.signum();
        let sb = other.signum();
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // Same nonzero sign: compare magnitudes by msb position first.
        let pa = self.msb_pos().unwrap();
        let pb = other.msb_pos().unwrap();
        if pa != pb {
            let mag = pa.cmp(&pb);
            return if sa > 0 { mag } else { mag.reverse() };
        }
        // Same position: align exponents and compare mantissas exactly.
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        a.cmp(&b)
    }

    pub fn cmp_int(&self, n: &BigInt) -> Ordering {
        self.cmp_value(&Dyadic::from_bigint(n))
    }

    /// Exact comparison against the rational `num/den` (`den > 0`).
    pub fn cmp_ratio(&self, num: &BigInt, den: &BigInt) -> Ordering {
        assert!(den.sign() == Sign::Plus, "cmp_ratio needs den > 0");
        // self ? num/den  <=>  mant * den * 2^exp ? num
        let lhs = Dyadic::new(&self.mant * den, self.exp);
        lhs.cmp_int(num)
    }

    /// Exact decimal representation, e.g. `-3.0625`. A dyadic always has a
    /// finite decimal expansion; trailing fraction zeros are trimmed.
    pub fn to_decimal_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.signum() < 0;
        let mag = self.mant.abs();
        let (int_part, frac) = if self.exp >= 0 {
            ((mag << self.exp as u64).to_string(), String::new())
        } else {
            let k = (-self.exp) as u64;
            let int = &mag >> k;
            let rem = &mag - (&int << k);
            // rem / 2^k == rem * 5^k / 10^k: exactly k decimal digits.
            let digits = (rem * BigInt::from(5).pow(k as u32)).to_string();
            let padded = format!("{:0>width$}", digits, width = k as usize);
            let trimmed = padded.trim_end_matches('0');
            (int.to_string(), trimmed.to_string())
        };
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push_str(&int_part);
        if !frac.is_empty() {
            s.push('.');
            s.push_str(&frac);
        }
        s
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_value(other)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({} * 2^{})", self.mant, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}
