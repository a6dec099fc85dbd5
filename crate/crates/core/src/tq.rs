//! First order of the T-Q relation `T(x) Q(x) = e^{gamma N} Q(qx) + q^p (1-x)^N Q(x/q)`
//! in `gamma`, built explicitly. The Perron eigenvalue is read off as
//! `lambda_1 = q_{p-1}`, which gives a route to `J` that does not go through
//! the stationary measure.
//!
//! With `Q = x^p + gamma Q_1 + ...` and `B_1(x) = q^p Q_1(x/q) - Q_1(x)`, the
//! coefficients obey `b_i = (q^{p-i} - 1) q_i` and `B_1(qx) = (1-x)^N B_1(x)`
//! modulo `x^p`.

use crate::error::{Error, Result};
use crate::numerics::{Backend, Scalar, TruncSeries};
use crate::stationary::{ModelParams, StationaryData};

#[derive(Clone, Debug, PartialEq)]
pub struct TqFirstOrder<S: Scalar> {
    pub q0: Vec<S>,
    pub t0: Vec<S>,
    pub b1: Vec<S>,
    pub q1: Vec<S>,
    pub t1: Vec<S>,
    pub lambda1: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TqCheck<S: Scalar> {
    /// Coefficients of `T_0 Q_1 + T_1 Q_0 - Q_1(qx) - N Q_0(qx) - q^p (1-x)^N Q_1(x/q)`.
    pub residual: Vec<S>,
    pub max_residual: f64,
    /// `Q_1(1)`; should equal `p`.
    pub q1_at_one: S,
    pub lambda1: S,
    pub current: S,
    pub passed: bool,
}

fn reject_degenerate<S: Scalar>(params: &ModelParams<S>) -> Result<()> {
    if params.q().is_unity() {
        return Err(Error::UnityRegime("first-order T-Q construction"));
    }
    // q <= -1 never gets past QValue, so q^{p-i} = 1 only at q = 1
    Ok(())
}

/// `b_i = -N (1-q)^{p-i} [x^i] F^N / Z(N,p)` for `i < p`.
pub fn b1_polynomial<S: Scalar>(params: &ModelParams<S>) -> Result<Vec<S>> {
    reject_degenerate(params)?;
    let ctx = params.context();
    let p = params.particles();
    let data = StationaryData::build(params);
    let z = data.z_values();
    let one_minus_q = S::one(&ctx) - params.q().value();
    let scale = -S::from_usize(params.sites(), &ctx) / &z[p];
    Ok((0..p)
        .map(|i| scale.clone() * &one_minus_q.powu((p - i) as u64) * &z[i])
        .collect())
}

/// `q_i = b_i / (q^{p-i} - 1)`.
pub fn q1_polynomial<S: Scalar>(b1: &[S], params: &ModelParams<S>) -> Result<Vec<S>> {
    reject_degenerate(params)?;
    let ctx = params.context();
    let p = params.particles();
    if b1.len() != p {
        return Err(Error::DegreeMismatch(b1.len(), p));
    }
    let q = params.q().value();
    b1.iter()
        .enumerate()
        .map(|(i, b)| {
            let den = q.powu((p - i) as u64) - &S::one(&ctx);
            if den.is_zero() {
                return Err(Error::InvalidParameter(format!(
                    "q^{} = 1 leaves q_{i} undetermined",
                    p - i
                )));
            }
            Ok(b.clone() / &den)
        })
        .collect()
}

fn tolerance<S: Scalar>(ctx: &S::Context) -> f64 {
    match S::backend(ctx) {
        Backend::Rational => 0.0,
        Backend::Float(prec) => prec.epsilon() * 2f64.powi(40),
    }
}

fn max_abs<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.abs().to_f64()).fold(0.0, f64::max)
}

/// `(1-x)^N` as a series of degree `d`.
fn one_minus_x_pow<S: Scalar>(n: usize, d: usize, ctx: &S::Context) -> TruncSeries<S> {
    let base = TruncSeries::from_fn(d, |k| match k {
        0 => S::one(ctx),
        1 => S::from_i64(-1, ctx),
        _ => S::zero(ctx),
    });
    base.pow(n as u64)
}

/// `T_1(x) = N q^p + x^{-p} [(1-x)^N B_1(x) - B_1(qx)]`, degree below `N`.
pub fn t1_polynomial<S: Scalar>(b1: &[S], params: &ModelParams<S>) -> Result<Vec<S>> {
    reject_degenerate(params)?;
    let ctx = params.context();
    let (n, p) = (params.sites(), params.particles());
    let q = params.q().value();
    let d = n + p;
    let b = TruncSeries::from_fn(d, |k| b1.get(k).cloned().unwrap_or_else(|| S::zero(&ctx)));
    let bracket = one_minus_x_pow(n, d, &ctx).mul(&b)?.sub(&b.scale_arg(q))?;
    let low = &bracket.coeffs()[..p];
    let tol = tolerance::<S>(&ctx) * (1.0 + max_abs(bracket.coeffs()));
    if max_abs(low) > tol {
        return Err(Error::Solver(format!(
            "(1-x)^N B_1(x) - B_1(qx) has low coefficients up to {:.3e}",
            max_abs(low)
        )));
    }
    let mut t1: Vec<S> = bracket.coeffs()[p..].to_vec();
    t1[0] = t1[0].clone() + &(S::from_usize(n, &ctx) * &q.powu(p as u64));
    // the bracket stops at degree N + p - 1
    t1.truncate(n.max(1));
    Ok(t1)
}

pub fn tq_first_order<S: Scalar>(params: &ModelParams<S>) -> Result<TqFirstOrder<S>> {
    let ctx = params.context();
    let (n, p) = (params.sites(), params.particles());
    let q = params.q().value();
    let b1 = b1_polynomial(params)?;
    let q1 = q1_polynomial(&b1, params)?;
    let t1 = t1_polynomial(&b1, params)?;
    let q0 = (0..=p)
        .map(|k| if k == p { S::one(&ctx) } else { S::zero(&ctx) })
        .collect();
    let mut t0: Vec<S> = one_minus_x_pow(n, n, &ctx).into_coeffs();
    t0[0] = t0[0].clone() + &q.powu(p as u64);
    let lambda1 = q1[p - 1].clone();
    Ok(TqFirstOrder {
        q0,
        t0,
        b1,
        q1,
        t1,
        lambda1,
    })
}

/// Evaluates the first-order identity as a polynomial of degree `N + p`.
pub fn verify_tq_first_order<S: Scalar>(
    tq: &TqFirstOrder<S>,
    params: &ModelParams<S>,
) -> Result<TqCheck<S>> {
    let ctx = params.context();
    let (n, p) = (params.sites(), params.particles());
    let q = params.q().value();
    let d = n + p;
    let lift = |v: &[S]| -> Result<TruncSeries<S>> {
        if v.len() > d + 1 {
            return Err(Error::DegreeMismatch(v.len() - 1, d));
        }
        Ok(TruncSeries::from_fn(d, |k| {
            v.get(k).cloned().unwrap_or_else(|| S::zero(&ctx))
        }))
    };
    let q0 = lift(&tq.q0)?;
    let t0 = lift(&tq.t0)?;
    let q1 = lift(&tq.q1)?;
    let t1 = lift(&tq.t1)?;
    // q^p Q_1(x/q) has coefficients q_i q^{p-i}
    let q1_over = TruncSeries::from_fn(d, |k| {
        if k < p {
            tq.q1[k].clone() * &q.powu((p - k) as u64)
        } else {
            S::zero(&ctx)
        }
    });
    let lhs = t0.mul(&q1)?.add(&t1.mul(&q0)?)?;
    let rhs = q1
        .scale_arg(q)
        .add(&q0.scale_arg(q).scale(&S::from_usize(n, &ctx)))?
        .add(&one_minus_x_pow(n, d, &ctx).mul(&q1_over)?)?;
    let residual = lhs.sub(&rhs)?.into_coeffs();
    let max_residual = max_abs(&residual);
    let q1_at_one = tq.q1.iter().fold(S::zero(&ctx), |acc, c| acc + c);
    let current = StationaryData::build(params).current().clone();

    let tol = tolerance::<S>(&ctx);
    let close = |a: &S, b: &S| {
        let gap = (a.clone() - b).abs().to_f64();
        if S::EXACT {
            a == b
        } else {
            gap <= tol * (1.0 + b.abs().to_f64())
        }
    };
    let p_s = S::from_usize(p, &ctx);
    let residual_ok = if S::EXACT {
        residual.iter().all(|c| c.is_zero())
    } else {
        max_residual <= tol * (1.0 + max_abs(&lhs.into_coeffs()))
    };
    let passed = residual_ok && close(&q1_at_one, &p_s) && close(&tq.lambda1, &current);
    Ok(TqCheck {
        residual,
        max_residual,
        q1_at_one,
        lambda1: tq.lambda1.clone(),
        current,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn params(n: usize, p: usize, q: BigRational) -> ModelParams<BigRational> {
        ModelParams::new(n, p, q).unwrap()
    }

    #[test]
    fn b0_is_the_normalization() {
        // Z(2,1) = 2, so b_0 = -2 (1/2) / 2
        let b = b1_polynomial(&params(2, 1, rat(1, 2))).unwrap();
        assert_eq!(b, vec![rat(-1, 2)]);
    }

    #[test]
    fn one_particle_q1_is_one() {
        for q in [rat(1, 2), rat(3, 1), rat(-1, 2)] {
            let tq = tq_first_order(&params(3, 1, q)).unwrap();
            assert_eq!(tq.q1, vec![rat(1, 1)]);
        }
    }

    #[test]
    fn small_cases_satisfy_the_identity() {
        for (n, p, q) in [(2, 1, rat(1, 2)), (4, 3, rat(2, 1)), (3, 2, rat(-1, 2))] {
            let pr = params(n, p, q);
            let tq = tq_first_order(&pr).unwrap();
            let check = verify_tq_first_order(&tq, &pr).unwrap();
            assert!(check.passed);
            assert!(check.residual.iter().all(|c| c.is_zero()));
            assert_eq!(check.q1_at_one, rat(p as i64, 1));
        }
    }

    #[test]
    fn t1_has_degree_below_n() {
        let pr = params(4, 3, rat(2, 1));
        let tq = tq_first_order(&pr).unwrap();
        assert_eq!(tq.t1.len(), 4);
    }

    #[test]
    fn rejected_regimes() {
        assert!(matches!(
            b1_polynomial(&params(2, 2, rat(1, 1))),
            Err(Error::UnityRegime(_))
        ));
    }

    #[test]
    fn corrupted_q1_fails() {
        let pr = params(3, 2, rat(1, 3));
        let mut tq = tq_first_order(&pr).unwrap();
        tq.q1[0] = tq.q1[0].clone() + rat(1, 7);
        assert!(!verify_tq_first_order(&tq, &pr).unwrap().passed);
    }
}
