//! Exact group diffusion coefficient `Delta = lambda''(0)`.
//!
//! The double contour integrals around the origin reduce to finite sums of
//! series coefficients. With `C_a = [z^a] F^N`, `phi_b` the coefficients of
//! `phi` and `A_k = sum_{a+b=p-1-k} C_a phi_b`:
//!
//! ```text
//! Delta = p J + 2 N^2 / Z(N,p)^2 * (S1 + S2)
//! S1    = sum_k Z(N,p+k) A_k
//! S2    = sum_k Z(N,p+k) [ sum_b C_{p-1-k-b} phi_b G(k+1+b) + [k>=1] A_k G(k) ]
//! G(a)  = r^a / (1 - r^a)
//! ```
//!
//! with `G(a) = q^a / (1 - q^a)` for every `q != 1`. For fixed `N, p` both
//! sides are rational in `q`, so the closed form derived for `|q| < 1`
//! carries over to `q > 1` as is. `A_0` vanishes exactly, which is what
//! makes the `k = 0` kernel sum finite.
//!
//! The truncated variant expands `G` as a geometric series that converges:
//! `G(a) = sum_{i>=1} q^{ia}` below one and `G(a) = -sum_{i>=0} q^{-ia}`
//! above one.

use crate::error::{Error, Result};
use crate::numerics::{geometric_factor, BigReal, Exports, Regime, Scalar};
use crate::stationary::{phi_coefficients, ModelParams, PhiSeries, StationaryData};

#[derive(Clone, Debug, PartialEq)]
pub struct Breakdown<S: Scalar> {
    /// `p J`
    pub pj: S,
    pub s1: S,
    pub s2: S,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Method<S: Scalar> {
    /// Kernel sums in closed form.
    Resummed,
    /// Kernel sums cut at `i_max`; the neglected tail is at most `tail_bound`
    /// in absolute value on the scale of `Delta`.
    Truncated { i_max: usize, tail_bound: S },
    /// `q = 1`, where `J = Delta = p`.
    FreeParticles,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaResult<S: Scalar> {
    pub delta: S,
    pub current: S,
    pub breakdown: Option<Breakdown<S>>,
    pub method: Method<S>,
}

impl Exports for DeltaResult<BigReal> {
    fn exports(&self) -> Vec<(&'static str, BigReal)> {
        vec![("Delta", self.delta.clone()), ("J", self.current.clone())]
    }
}

/// Stationary pieces shared by the resummed and truncated evaluations.
struct Ingredients<S: Scalar> {
    data: StationaryData<S>,
    phi: PhiSeries<S>,
    /// `A_k` for `k = 0..p`
    conv: Vec<S>,
    prefactor: S,
    pj: S,
}

impl<S: Scalar> Ingredients<S> {
    fn new(params: &ModelParams<S>) -> Result<Self> {
        let ctx = params.context();
        let p = params.particles();
        let data = StationaryData::build(params);
        let phi = phi_coefficients(params, data.current(), p - 1)?;
        let c = data.z_values();
        let conv: Vec<S> = (0..p)
            .map(|k| {
                let top = p - 1 - k;
                (0..=top).fold(S::zero(&ctx), |acc, b| {
                    acc + &(c[top - b].clone() * &phi.coeffs()[b])
                })
            })
            .collect();

        if S::EXACT {
            if !conv[0].is_zero() {
                return Err(Error::Precision(format!(
                    "A_0 = {} is not zero on the exact backend",
                    conv[0]
                )));
            }
        } else {
            let scale = (0..p).fold(S::zero(&ctx), |acc, b| {
                acc + &(c[p - 1 - b].clone() * &phi.coeffs()[b]).abs()
            });
            let gap = if scale.is_zero() {
                0.0
            } else {
                (conv[0].abs() / &scale).to_f64()
            };
            let tol = precision_tolerance::<S>(&ctx);
            if gap > tol {
                return Err(Error::Precision(format!(
                    "A_0 should vanish but |A_0|/scale = {gap:.3e} exceeds {tol:.3e} \
                     (N={}, p={}, q={})",
                    params.sites(),
                    p,
                    params.q().value()
                )));
            }
        }

        let n = S::from_usize(params.sites(), &ctx);
        let zp = c[p].clone();
        let prefactor = S::from_i64(2, &ctx) * &n * &n / &(zp.clone() * &zp);
        let pj = S::from_usize(p, &ctx) * data.current();
        Ok(Ingredients {
            data,
            phi,
            conv,
            prefactor,
            pj,
        })
    }

    fn c(&self, a: usize) -> &S {
        &self.data.z_values()[a]
    }

    fn z(&self, p: usize, k: usize) -> &S {
        &self.data.z_values()[p + k]
    }

    fn s1(&self, p: usize, ctx: &S::Context) -> S {
        (0..p).fold(S::zero(ctx), |acc, k| {
            acc + &(self.z(p, k).clone() * &self.conv[k])
        })
    }

    fn finish(self, s1: S, s2: S, method: Method<S>) -> DeltaResult<S> {
        let delta = self.pj.clone() + &(self.prefactor.clone() * &(s1.clone() + &s2));
        DeltaResult {
            delta,
            current: self.data.current().clone(),
            breakdown: Some(Breakdown {
                pj: self.pj,
                s1,
                s2,
            }),
            method,
        }
    }
}

/// Relative size below which a float quantity that is exactly zero in exact
/// arithmetic is accepted as zero.
fn precision_tolerance<S: Scalar>(ctx: &S::Context) -> f64 {
    match S::backend(ctx) {
        crate::numerics::Backend::Rational => 0.0,
        crate::numerics::Backend::Float(p) => p.epsilon() * 2f64.powi(24),
    }
}

fn free_particles<S: Scalar>(params: &ModelParams<S>) -> DeltaResult<S> {
    let p = S::from_usize(params.particles(), &params.context());
    DeltaResult {
        delta: p.clone(),
        current: p,
        breakdown: None,
        method: Method::FreeParticles,
    }
}

/// `Delta` with every kernel sum over `i` done in closed form.
pub fn delta_exact_resummed<S: Scalar>(params: &ModelParams<S>) -> Result<DeltaResult<S>> {
    if params.q().is_unity() {
        return Ok(free_particles(params));
    }
    let ctx = params.context();
    let p = params.particles();
    let r = params.q().value();
    let ing = Ingredients::new(params)?;
    let s1 = ing.s1(p, &ctx);

    let mut s2 = S::zero(&ctx);
    for k in 0..p {
        let top = p - 1 - k;
        let mut inner = S::zero(&ctx);
        for b in 0..=top {
            let g = geometric_factor(r, (k + 1 + b) as u64)?;
            inner = inner + &(ing.c(top - b).clone() * &ing.phi.coeffs()[b] * &g);
        }
        if k >= 1 {
            inner = inner + &(ing.conv[k].clone() * &geometric_factor(r, k as u64)?);
        }
        s2 = s2 + &(ing.z(p, k).clone() * &inner);
    }
    Ok(ing.finish(s1, s2, Method::Resummed))
}

/// `Delta` with the kernel sums over `i` evaluated term by term up to `i_max`.
pub fn delta_exact_truncated<S: Scalar>(
    params: &ModelParams<S>,
    i_max: usize,
) -> Result<DeltaResult<S>> {
    if params.q().is_unity() {
        return Ok(free_particles(params));
    }
    let ctx = params.context();
    let p = params.particles();
    let r = params.q().ratio();
    let one = S::one(&ctx);
    let ing = Ingredients::new(params)?;
    let s1 = ing.s1(p, &ctx);
    let above = params.q().regime() == Regime::AboveOne;

    let mut s2 = S::zero(&ctx);
    let mut r_i = one.clone();
    let first = if above { 0 } else { 1 };
    for i in first..=i_max {
        if i > 0 {
            r_i = r_i * r;
        }
        let mut r_ik = one.clone();
        let mut term_i = S::zero(&ctx);
        for k in 0..p {
            let top = p - 1 - k;
            let mut r_ib = one.clone();
            let mut inner = S::zero(&ctx);
            for b in 0..=top {
                inner = inner + &(ing.c(top - b).clone() * &ing.phi.coeffs()[b] * &r_ib);
                r_ib = r_ib * &r_i;
            }
            let bracket = r_i.clone() * &inner + &ing.conv[k];
            term_i = term_i + &(r_ik.clone() * ing.z(p, k) * &bracket);
            r_ik = r_ik * &r_i;
        }
        s2 = s2 + &term_i;
    }
    if above {
        s2 = -s2;
    }

    // every i-term is bounded by |r|^i times this constant
    let mut bound_const = S::zero(&ctx);
    for k in 0..p {
        let top = p - 1 - k;
        let mut inner = ing.conv[k].abs();
        for b in 0..=top {
            inner = inner + &(ing.c(top - b).clone() * &ing.phi.coeffs()[b]).abs();
        }
        bound_const = bound_const + &(ing.z(p, k).abs() * &inner);
    }
    let abs_r = r.abs();
    let tail_bound =
        ing.prefactor.abs() * &bound_const * &abs_r.powu(i_max as u64 + 1) / &(one - &abs_r);

    Ok(ing.finish(s1, s2, Method::Truncated { i_max, tail_bound }))
}

/// Large-`N` estimate `N^2 Z(2N,2p) / Z(N,p)^2 (j_N - j_{2N})`, accurate to
/// `O(N)` in absolute terms.
pub fn delta_fss_estimate<S: Scalar>(params: &ModelParams<S>) -> Result<S> {
    if params.q().is_unity() {
        return Err(Error::UnityRegime("finite-size estimate of Delta"));
    }
    let ctx = params.context();
    let p = params.particles();
    let data = StationaryData::build(params);
    let doubled = data.grand_series().pow(2);
    let z_np = data.z(p)?.clone();
    let z_2n2p = doubled.coeff(2 * p)?.clone();
    let j_2n = doubled.coeff(2 * p - 1)?.clone() / &z_2n2p;
    let n = S::from_usize(params.sites(), &ctx);
    Ok(n.clone() * &n * &z_2n2p / &(z_np.clone() * &z_np) * &(data.bond_current().clone() - &j_2n))
}
