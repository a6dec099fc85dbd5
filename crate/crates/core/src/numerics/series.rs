//! Truncated formal power series. Every origin contour integral in the
//! library is a coefficient read from one of these.

use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TruncSeries<S: Scalar> {
    coeffs: Vec<S>,
}

impl<S: Scalar> TruncSeries<S> {
    /// Series whose degree is `coeffs.len() - 1`. Panics on an empty vector.
    pub fn new(coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least c_0");
        TruncSeries { coeffs }
    }

    pub fn from_fn(degree: usize, f: impl FnMut(usize) -> S) -> Self {
        Self::new((0..=degree).map(f).collect())
    }

    pub fn zero(degree: usize, ctx: &S::Context) -> Self {
        Self::from_fn(degree, |_| S::zero(ctx))
    }

    pub fn one(degree: usize, ctx: &S::Context) -> Self {
        Self::from_fn(degree, |k| if k == 0 { S::one(ctx) } else { S::zero(ctx) })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    fn context(&self) -> S::Context {
        self.coeffs[0].context()
    }

    fn check_degree(&self, other: &Self) -> Result<()> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        Ok(Self::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        Ok(Self::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() - b)
                .collect(),
        ))
    }

    /// Cauchy product truncated at the common degree.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let d = self.degree();
        let ctx = self.context();
        let mut out: Vec<S> = (0..=d).map(|_| S::zero(&ctx)).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=d - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = out[i + j].clone() + &(a.clone() * b);
                }
            }
        }
        Self::new(out)
    }

    /// `self^n` by binary exponentiation; `a^0 = 1`.
    pub fn pow(&self, n: u64) -> Self {
        let mut acc: Option<Self> = None;
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul_unchecked(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc.unwrap_or_else(|| Self::one(self.degree(), &self.context()))
    }

    pub fn coeff(&self, k: usize) -> Result<&S> {
        self.coeffs.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            degree: self.degree(),
        })
    }

    /// Substitution `z -> c z`: coefficient `k` picks up `c^k`.
    pub fn scale_arg(&self, c: &S) -> Self {
        let ctx = self.context();
        let mut power = S::one(&ctx);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a.clone() * &power);
            power = power * c;
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c).collect())
    }

    /// Same series cut (or zero-padded) to a new degree.
    pub fn resized(&self, degree: usize) -> Self {
        let ctx = self.context();
        Self::from_fn(degree, |k| {
            self.coeffs.get(k).cloned().unwrap_or_else(|| S::zero(&ctx))
        })
    }
}

/// `r^a / (1 - r^a)`, which equals `sum_{i >= 1} r^{i a}` when `|r| < 1`.
pub fn geometric_factor<S: Scalar>(r: &S, a: u64) -> Result<S> {
    if a == 0 {
        return Err(Error::InvalidParameter(
            "geometric factor with exponent 0 diverges".into(),
        ));
    }
    let ra = r.powu(a);
    let one = S::one(&r.context());
    Ok(ra.clone() / &(one - &ra))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn series(c: &[i64]) -> TruncSeries<BigRational> {
        TruncSeries::new(c.iter().map(|&x| rat(x, 1)).collect())
    }

    #[test]
    fn addition() {
        assert_eq!(
            series(&[1, 1]).add(&series(&[1, -1])).unwrap(),
            series(&[2, 0])
        );
        assert_eq!(
            series(&[1, 2, 3]).add(&series(&[1, 1, 0])).unwrap(),
            series(&[2, 3, 3])
        );
        let a = series(&[4, -2, 7]);
        assert_eq!(a.add(&TruncSeries::zero(2, &())).unwrap(), a);
    }

    #[test]
    fn degree_mismatch_is_an_error() {
        assert_eq!(
            series(&[1, 2]).add(&series(&[1])),
            Err(Error::DegreeMismatch(1, 0))
        );
        assert!(series(&[1, 2]).mul(&series(&[1, 2, 3])).is_err());
    }

    #[test]
    fn multiplication() {
        assert_eq!(
            series(&[1, 1, 0]).mul(&series(&[1, -1, 0])).unwrap(),
            series(&[1, 0, -1])
        );
        let a = series(&[3, 1, 4, 1]);
        assert_eq!(a.mul(&TruncSeries::one(3, &())).unwrap(), a);
        let geometric = series(&[1, 1, 1, 1, 1, 1]);
        let one_minus = series(&[1, -1, 0, 0, 0, 0]);
        assert_eq!(geometric.mul(&one_minus).unwrap(), TruncSeries::one(5, &()));
    }

    #[test]
    fn powers() {
        assert_eq!(series(&[1, 1, 0]).pow(2), series(&[1, 2, 1]));
        let a = series(&[2, 5, -1]);
        assert_eq!(a.pow(1), a);
        assert_eq!(a.pow(0), TruncSeries::one(2, &()));
    }

    #[test]
    fn stars_and_bars() {
        // (1/(1-z))^n has z^p coefficient C(n+p-1, p)
        let geometric = TruncSeries::from_fn(6, |_| rat(1, 1));
        for n in 1..7u64 {
            let pw = geometric.pow(n);
            for p in 0..=6u64 {
                let expect = binomial(n + p - 1, p);
                assert_eq!(pw.coeff(p as usize).unwrap(), &rat(expect as i64, 1));
            }
        }
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn coefficient_reads() {
        assert_eq!(series(&[1, 3]).coeff(1).unwrap(), &rat(3, 1));
        assert_eq!(
            series(&[1, 3]).coeff(2),
            Err(Error::IndexOutOfRange {
                index: 2,
                degree: 1
            })
        );
    }

    #[test]
    fn argument_scaling() {
        let a = series(&[1, 1, 1]);
        assert_eq!(a.scale_arg(&rat(2, 1)), series(&[1, 2, 4]));
        assert_eq!(a.scale_arg(&rat(1, 1)), a);
        assert_eq!(a.scale_arg(&rat(0, 1)), series(&[1, 0, 0]));
    }

    #[test]
    fn geometric_factor_values() {
        assert_eq!(geometric_factor(&rat(1, 2), 1).unwrap(), rat(1, 1));
        assert_eq!(geometric_factor(&rat(1, 2), 2).unwrap(), rat(1, 3));
        assert_eq!(geometric_factor(&rat(-1, 2), 1).unwrap(), rat(-1, 3));
        assert!(geometric_factor(&rat(1, 2), 0).is_err());
    }
}
