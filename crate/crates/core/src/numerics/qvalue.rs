use serde::{Deserialize, Serialize};

use super::scalar::Scalar;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `-1 < q < 1`
    BelowOne,
    /// `q > 1`
    AboveOne,
    /// `q = 1`, free particles.
    Unity,
}

/// The deformation parameter together with its regime and the geometric
/// ratio `r` (`q` below one, `1/q` above one) of the kernel sums.
#[derive(Clone, Debug, PartialEq)]
pub struct QValue<S: Scalar> {
    q: S,
    regime: Regime,
    r: S,
}

impl<S: Scalar> QValue<S> {
    pub fn new(q: S) -> Result<Self> {
        let ctx = q.context();
        let one = S::one(&ctx);
        if q <= -one.clone() {
            return Err(invalid(format!("q must exceed -1, got {q}")));
        }
        let (regime, r) = if q == one {
            (Regime::Unity, one)
        } else if q > one {
            (Regime::AboveOne, one / &q)
        } else {
            (Regime::BelowOne, q.clone())
        };
        Ok(QValue { q, regime, r })
    }

    pub fn value(&self) -> &S {
        &self.q
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Ratio of the geometric kernel sums, `|r| < 1` off unity.
    pub fn ratio(&self) -> &S {
        &self.r
    }

    pub fn is_unity(&self) -> bool {
        self.regime == Regime::Unity
    }

    pub fn context(&self) -> S::Context {
        self.q.context()
    }
}
