//! Binary floating point with a configurable mantissa width.
//!
//! A nonzero value is `mant * 2^exp` with `|mant|` holding exactly `prec`
//! bits, so every value has a unique representation. All operations round
//! to nearest, ties to even. Binary operations work at the larger of the
//! two operand precisions.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Mantissa width in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_BITS: u32 = 24;

    pub const fn new(bits: u32) -> Self {
        if bits < Self::MIN_BITS {
            Precision(Self::MIN_BITS)
        } else {
            Precision(bits)
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn doubled(self) -> Self {
        Precision(self.0 * 2)
    }

    /// Number of decimal digits the mantissa carries.
    pub fn decimal_digits(self) -> usize {
        (f64::from(self.0) * std::f64::consts::LOG10_2).floor() as usize
    }

    /// Unit roundoff `2^-prec` as an f64 (saturates at 0 for huge widths).
    pub fn epsilon(self) -> f64 {
        2f64.powi(-(self.0.min(1074) as i32))
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(256)
    }
}

#[derive(Clone, Debug)]
pub struct BigReal {
    mant: BigInt,
    exp: i64,
    prec: Precision,
}

/// Round a magnitude to `prec` bits, ties to even. `sticky` records that
/// nonzero bits were already discarded below the lowest bit of `mag`.
fn round_magnitude(mag: BigUint, exp: i64, prec: u32, sticky: bool) -> (BigUint, i64) {
    if mag.is_zero() {
        return (mag, 0);
    }
    let bits = mag.bits() as i64;
    let shift = bits - i64::from(prec);
    if shift <= 0 {
        let up = (-shift) as usize;
        return (mag << up, exp - up as i64);
    }
    let shift_u = shift as usize;
    let mut kept = &mag >> shift_u;
    let rem = &mag - (&kept << shift_u);
    let half = BigUint::one() << (shift_u - 1);
    let round_up = match rem.cmp(&half) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => sticky || kept.is_odd(),
    };
    let mut exp = exp + shift;
    if round_up {
        kept += 1u32;
        if kept.bits() as i64 > i64::from(prec) {
            kept >>= 1;
            exp += 1;
        }
    }
    (kept, exp)
}

impl BigReal {
    fn from_parts(mant: BigInt, exp: i64, prec: Precision, sticky: bool) -> Self {
        let (sign, mag) = mant.into_parts();
        let (mag, exp) = round_magnitude(mag, exp, prec.0, sticky);
        let mant = if mag.is_zero() {
            BigInt::zero()
        } else {
            BigInt::from_biguint(sign, mag)
        };
        BigReal { mant, exp, prec }
    }

    pub fn zero(prec: Precision) -> Self {
        BigReal {
            mant: BigInt::zero(),
            exp: 0,
            prec,
        }
    }

    pub fn from_i64(n: i64, prec: Precision) -> Self {
        Self::from_parts(BigInt::from(n), 0, prec, false)
    }

    pub fn from_bigint(n: &BigInt, prec: Precision) -> Self {
        Self::from_parts(n.clone(), 0, prec, false)
    }

    /// Exact conversion of an f64 followed by rounding to `prec`.
    pub fn from_f64(x: f64, prec: Precision) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Self::zero(prec));
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Some(Self::from_parts(
            BigInt::from_biguint(sign, BigUint::from(m)),
            e,
            prec,
            false,
        ))
    }

    fn quotient(num: BigInt, den: BigInt, exp: i64, prec: Precision) -> Self {
        assert!(!den.is_zero(), "BigReal division by zero");
        if num.is_zero() {
            return Self::zero(prec);
        }
        let negative = num.is_negative() != den.is_negative();
        let num = num.into_parts().1;
        let den = den.into_parts().1;
        let shift = (i64::from(prec.0) + 2 + den.bits() as i64 - num.bits() as i64).max(0) as usize;
        let (q, r) = (num << shift).div_rem(&den);
        let sign = if negative { Sign::Minus } else { Sign::Plus };
        Self::from_parts(
            BigInt::from_biguint(sign, q),
            exp - shift as i64,
            prec,
            !r.is_zero(),
        )
    }

    pub fn from_rational(r: &BigRational, prec: Precision) -> Self {
        Self::quotient(r.numer().clone(), r.denom().clone(), 0, prec)
    }

    pub fn from_ratio(num: i64, den: i64, prec: Precision) -> Self {
        Self::quotient(BigInt::from(num), BigInt::from(den), 0, prec)
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    /// Same value rounded to a different mantissa width.
    pub fn with_precision(&self, prec: Precision) -> Self {
        Self::from_parts(self.mant.clone(), self.exp, prec, false)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn abs(&self) -> Self {
        BigReal {
            mant: self.mant.abs(),
            exp: self.exp,
            prec: self.prec,
        }
    }

    /// Binary exponent of the leading bit plus one (`|x| < 2^top`).
    fn top(&self) -> i64 {
        self.exp + self.mant.bits() as i64
    }

    /// Exact conversion into a rational.
    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as usize)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mag = self.mant.magnitude();
        let bits = mag.bits() as i64;
        let drop = (bits - 64).max(0);
        let top = (mag >> drop as usize).to_u64().unwrap_or(u64::MAX) as f64;
        let e = self.exp + drop;
        let scaled = scale_pow2(top, e);
        if self.is_negative() {
            -scaled
        } else {
            scaled
        }
    }

    fn add_signed(&self, other: &Self, negate_other: bool) -> Self {
        let prec = self.prec.max(other.prec);
        let b_mant = if negate_other {
            -other.mant.clone()
        } else {
            other.mant.clone()
        };
        if other.is_zero() {
            return self.with_precision(prec);
        }
        if self.is_zero() {
            return Self::from_parts(b_mant, other.exp, prec, false);
        }
        let gap = self.top() - other.top();
        let guard = i64::from(prec.0) + 3;
        if gap > guard {
            // other is below a quarter ulp; it only matters as a sticky bit
            return self.with_precision(prec);
        }
        if -gap > guard {
            return Self::from_parts(b_mant, other.exp, prec, false);
        }
        let base = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - base) as usize;
        let b = b_mant << (other.exp - base) as usize;
        Self::from_parts(a + b, base, prec, false)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        Self::from_parts(&self.mant * &other.mant, self.exp + other.exp, prec, false)
    }

    fn div_ref(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        Self::quotient(
            self.mant.clone(),
            other.mant.clone(),
            self.exp - other.exp,
            prec,
        )
    }

    /// Multiply by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        BigReal {
            mant: self.mant.clone(),
            exp: self.exp + k,
            prec: self.prec,
        }
    }

    pub fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        if self.is_zero() {
            return Some(self.clone());
        }
        let prec = self.prec;
        let mag = self.mant.magnitude();
        let mut shift = (2 * i64::from(prec.0) + 4 - mag.bits() as i64).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let scaled = mag << shift as usize;
        let root = scaled.sqrt();
        let sticky = &root * &root != scaled;
        Some(Self::from_parts(
            BigInt::from_biguint(Sign::Plus, root),
            (self.exp - shift) / 2,
            prec,
            sticky,
        ))
    }

    /// `e^x` by argument halving and a Taylor series.
    pub fn exp(&self) -> Self {
        let prec = self.prec;
        if self.is_zero() {
            return Self::from_i64(1, prec);
        }
        let halvings = (self.top() + 12).max(0);
        let work = Precision::new(prec.0 + 32 + halvings as u32);
        let x = self.with_precision(work).mul_pow2(-halvings);
        let one = Self::from_i64(1, work);
        let mut sum = one.clone();
        let mut term = one;
        let cutoff = -(i64::from(work.0) + 4);
        for k in 1..10_000i64 {
            term = term.mul_ref(&x).div_ref(&Self::from_i64(k, work));
            if term.is_zero() || term.top() - sum.top() < cutoff {
                break;
            }
            sum = sum.add_signed(&term, false);
        }
        for _ in 0..halvings {
            sum = sum.mul_ref(&sum);
        }
        sum.with_precision(prec)
    }

    pub fn powi(&self, n: i64) -> Self {
        let base = if n < 0 {
            Self::from_i64(1, self.prec).div_ref(self)
        } else {
            self.clone()
        };
        let mut e = n.unsigned_abs();
        let mut acc = Self::from_i64(1, self.prec);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul_ref(&sq);
            }
        }
        acc
    }

    /// Decimal representation with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        let lead = self.abs().mul_pow2(-self.top());
        let log10 = (self.top() as f64 + lead.to_f64().log2()) * std::f64::consts::LOG10_2;
        let mut e10 = log10.floor() as i64;
        let mut text;
        loop {
            text = self.scaled_digits(digits as i64 - 1 - e10);
            if text.len() > digits {
                e10 += 1;
            } else if text.len() < digits {
                e10 -= 1;
            } else {
                break;
            }
        }
        let sign = if self.is_negative() { "-" } else { "" };
        format_decimal(sign, &text, e10)
    }

    /// `round(|x| * 10^s)` as a decimal digit string.
    fn scaled_digits(&self, s: i64) -> String {
        let mut num = BigInt::from_biguint(Sign::Plus, self.mant.magnitude().clone());
        let mut den = BigInt::one();
        let ten = BigInt::from(10u32);
        if s >= 0 {
            num *= num_traits::pow(ten, s as usize);
        } else {
            den *= num_traits::pow(ten, (-s) as usize);
        }
        if self.exp >= 0 {
            num <<= self.exp as usize;
        } else {
            den <<= (-self.exp) as usize;
        }
        let (q, r) = num.div_rem(&den);
        let q = if r * 2 >= den { q + 1 } else { q };
        q.to_string()
    }
}

fn scale_pow2(x: f64, e: i64) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

fn format_decimal(sign: &str, digits: &str, e10: i64) -> String {
    let trimmed = digits.trim_end_matches('0');
    let trimmed = if trimmed.is_empty() { "0" } else { trimmed };
    if (-7..21).contains(&e10) {
        if e10 >= 0 {
            let int_len = (e10 + 1) as usize;
            if trimmed.len() <= int_len {
                format!("{sign}{}{}", trimmed, "0".repeat(int_len - trimmed.len()))
            } else {
                format!("{sign}{}.{}", &trimmed[..int_len], &trimmed[int_len..])
            }
        } else {
            format!("{sign}0.{}{}", "0".repeat((-e10 - 1) as usize), trimmed)
        }
    } else if trimmed.len() == 1 {
        format!("{sign}{trimmed}e{e10}")
    } else {
        format!("{sign}{}.{}e{e10}", &trimmed[..1], &trimmed[1..])
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or_else(|| self.prec.decimal_digits());
        f.write_str(&self.to_decimal(digits))
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl BigReal {
    fn cmp_value(&self, other: &Self) -> Ordering {
        let sa = self.mant.sign();
        let sb = other.mant.sign();
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        let base = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - base) as usize;
        let b = &other.mant << (other.exp - base) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                let f: fn(&BigReal, &BigReal) -> BigReal = $body;
                f(&self, &rhs)
            }
        }
        impl<'a> $trait<&'a BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &'a BigReal) -> BigReal {
                let f: fn(&BigReal, &BigReal) -> BigReal = $body;
                f(&self, rhs)
            }
        }
        impl<'a, 'b> $trait<&'b BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &'b BigReal) -> BigReal {
                let f: fn(&BigReal, &BigReal) -> BigReal = $body;
                f(self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_signed(b, false));
forward_binop!(Sub, sub, |a, b| a.add_signed(b, true));
forward_binop!(Mul, mul, |a, b| a.mul_ref(b));
forward_binop!(Div, div, |a, b| a.div_ref(b));

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal {
            mant: -self.mant,
            exp: self.exp,
            prec: self.prec,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bits: u32) -> Precision {
        Precision::new(bits)
    }

    #[test]
    fn small_integers_are_exact() {
        let a = BigReal::from_i64(12345, p(64));
        let b = BigReal::from_i64(-345, p(64));
        assert_eq!((a.clone() + &b).to_f64(), 12000.0);
        assert_eq!((a.clone() * &b).to_f64(), -4259025.0);
        assert_eq!((a - b).to_f64(), 12690.0);
    }

    #[test]
    fn third_rounds_to_nearest() {
        let third = BigReal::from_ratio(1, 3, p(53));
        assert_eq!(third.to_f64(), 1.0 / 3.0);
        let sum = third.clone() + &third + &third;
        assert_eq!(sum.to_f64(), 1.0);
    }

    #[test]
    fn f64_roundtrip() {
        for x in [0.1, -2.5e-300, 7.0e300, 1.0 / 7.0, 5e-324] {
            let r = BigReal::from_f64(x, p(128)).unwrap();
            assert_eq!(r.to_f64(), x);
        }
    }

    #[test]
    fn sqrt_and_exp_match_f64() {
        let two = BigReal::from_i64(2, p(200));
        let s = two.sqrt().unwrap();
        assert!((s.to_f64() - 2f64.sqrt()).abs() < 1e-16);
        let back = s.clone() * &s - &two;
        assert!(back.abs().to_f64() < 1e-58);

        for x in [-3.5, -0.1, 0.0, 1e-6, 1.0, 7.25] {
            let e = BigReal::from_f64(x, p(200)).unwrap().exp();
            let rel = (e.to_f64() - x.exp()).abs() / x.exp();
            assert!(rel < 4e-16, "exp({x}) rel err {rel}");
        }
    }

    #[test]
    fn exp_is_consistent_at_high_precision() {
        let a = BigReal::from_ratio(3, 10, p(300));
        let b = BigReal::from_ratio(7, 10, p(300));
        let lhs = a.exp() * b.exp();
        let rhs = BigReal::from_i64(1, p(300)).exp();
        let rel = ((lhs - &rhs) / rhs).abs().to_f64();
        assert!(rel < 1e-85, "rel {rel}");
    }

    #[test]
    fn ordering_and_equality() {
        let a = BigReal::from_ratio(1, 3, p(80));
        let b = BigReal::from_ratio(1, 3, p(80));
        assert_eq!(a, b);
        assert!(BigReal::from_i64(-1, p(32)) < BigReal::from_i64(0, p(32)));
        assert!(BigReal::from_ratio(1, 1024, p(32)) > BigReal::from_ratio(-5, 1, p(32)));
    }

    #[test]
    fn decimal_formatting() {
        let prec = p(128);
        assert_eq!(BigReal::from_ratio(3, 2, prec).to_decimal(20), "1.5");
        assert_eq!(BigReal::from_i64(-120, prec).to_decimal(20), "-120");
        assert_eq!(BigReal::from_ratio(1, 1000, prec).to_decimal(5), "0.001");
        assert_eq!(BigReal::from_ratio(2, 3, prec).to_decimal(6), "0.666667");
        let big = BigReal::from_i64(10, prec).powi(30);
        assert_eq!(big.to_decimal(10), "1e30");
    }

    #[test]
    fn rational_roundtrip_is_exact() {
        let x = BigReal::from_ratio(-7, 16, p(64));
        assert_eq!(x.to_rational(), BigRational::new((-7).into(), 16.into()));
    }
}
