//! Scalar backends and truncated power series.

mod bigreal;
mod qvalue;
mod scalar;
mod series;

pub use bigreal::{BigReal, Precision};
pub use qvalue::{QValue, Regime};
pub use scalar::{relative_gap, sum, Backend, Scalar};
pub use series::{geometric_factor, TruncSeries};

use crate::error::{Error, Result};

/// Values a float computation exports and that must be stable under a
/// doubling of the working precision.
pub trait Exports {
    fn exports(&self) -> Vec<(&'static str, BigReal)>;
}

impl Exports for BigReal {
    fn exports(&self) -> Vec<(&'static str, BigReal)> {
        vec![("value", self.clone())]
    }
}

impl<A: Exports, B: Exports> Exports for (A, B) {
    fn exports(&self) -> Vec<(&'static str, BigReal)> {
        let mut out = self.0.exports();
        out.extend(self.1.exports());
        out
    }
}

/// Run `compute` at `prec` and again at `2 prec`; accept the first result
/// only if every exported number agrees to `rel_tol`.
pub fn verify_precision<R, F>(prec: Precision, rel_tol: f64, compute: F) -> Result<R>
where
    R: Exports,
    F: Fn(Precision) -> Result<R>,
{
    let coarse = compute(prec)?;
    let fine = compute(prec.doubled())?;
    for ((name, a), (_, b)) in coarse.exports().iter().zip(fine.exports().iter()) {
        let gap = relative_gap(&a.with_precision(prec.doubled()), b);
        if gap.is_nan() || gap > rel_tol {
            return Err(Error::Precision(format!(
                "{name} differs by relative {gap:.3e} between {} and {} bits",
                prec.bits(),
                prec.doubled().bits()
            )));
        }
    }
    Ok(coarse)
}
