use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::bigreal::{BigReal, Precision};

/// Which arithmetic a computation ran on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    Float(Precision),
}

impl Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Rational => f.write_str("rational"),
            Backend::Float(p) => write!(f, "float({})", p.bits()),
        }
    }
}

/// Field arithmetic shared by the exact and the arbitrary-precision backends.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    /// Whatever is needed to build constants: nothing for rationals, the
    /// mantissa width for floats.
    type Context: Clone + Debug + PartialEq + Send + Sync;

    const EXACT: bool;

    fn context(&self) -> Self::Context;
    fn backend(ctx: &Self::Context) -> Backend;
    fn from_i64(n: i64, ctx: &Self::Context) -> Self;
    fn from_rational(r: &BigRational, ctx: &Self::Context) -> Self;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;
    fn to_real(&self, prec: Precision) -> BigReal;

    fn zero(ctx: &Self::Context) -> Self {
        Self::from_i64(0, ctx)
    }

    fn one(ctx: &Self::Context) -> Self {
        Self::from_i64(1, ctx)
    }

    fn from_ratio(num: i64, den: i64, ctx: &Self::Context) -> Self {
        Self::from_rational(&BigRational::new(num.into(), den.into()), ctx)
    }

    fn from_usize(n: usize, ctx: &Self::Context) -> Self {
        Self::from_i64(n as i64, ctx)
    }

    /// Nonnegative integer power by repeated squaring; `x^0 = 1`.
    fn powu(&self, n: u64) -> Self {
        let mut acc = Self::one(&self.context());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * &base;
            }
        }
        acc
    }

    /// Serialized form: `num/den` on rationals, a decimal string on floats.
    fn to_text(&self) -> String {
        self.to_string()
    }
}

impl Scalar for BigRational {
    type Context = ();
    const EXACT: bool = true;

    fn context(&self) -> Self::Context {}

    fn backend(_: &()) -> Backend {
        Backend::Rational
    }

    fn from_i64(n: i64, _: &()) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_rational(r: &BigRational, _: &()) -> Self {
        r.clone()
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| self.to_real(Precision::new(64)).to_f64())
    }

    fn to_real(&self, prec: Precision) -> BigReal {
        BigReal::from_rational(self, prec)
    }

    fn one(_: &()) -> Self {
        One::one()
    }

    fn to_text(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

impl Scalar for BigReal {
    type Context = Precision;
    const EXACT: bool = false;

    fn context(&self) -> Precision {
        self.precision()
    }

    fn backend(ctx: &Precision) -> Backend {
        Backend::Float(*ctx)
    }

    fn from_i64(n: i64, ctx: &Precision) -> Self {
        BigReal::from_i64(n, *ctx)
    }

    fn from_rational(r: &BigRational, ctx: &Precision) -> Self {
        BigReal::from_rational(r, *ctx)
    }

    fn is_zero(&self) -> bool {
        BigReal::is_zero(self)
    }

    fn abs(&self) -> Self {
        BigReal::abs(self)
    }

    fn to_f64(&self) -> f64 {
        BigReal::to_f64(self)
    }

    fn to_real(&self, prec: Precision) -> BigReal {
        self.with_precision(prec)
    }
}

/// Sum of a sequence in iteration order.
pub fn sum<S: Scalar>(items: impl IntoIterator<Item = S>, ctx: &S::Context) -> S {
    items.into_iter().fold(S::zero(ctx), |acc, x| acc + &x)
}

/// `|a - b| / max(|a|, |b|)` as an f64, zero when both vanish.
pub fn relative_gap<S: Scalar>(a: &S, b: &S) -> f64 {
    let diff = (a.clone() - b).abs();
    let scale = if a.abs() > b.abs() { a.abs() } else { b.abs() };
    if scale.is_zero() {
        0.0
    } else {
        (diff / &scale).to_f64()
    }
}
