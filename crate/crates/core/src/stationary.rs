//! Stationary state of the q-boson zero range process: jump rates, one-site
//! weights, canonical partition functions, the mean current and occupation
//! statistics.

use crate::error::{invalid, Error, Result};
use crate::numerics::{sum, QValue, Scalar, TruncSeries};

/// Ring of `n` sites carrying `p` particles with deformation `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<S: Scalar> {
    n: usize,
    p: usize,
    q: QValue<S>,
}

impl<S: Scalar> ModelParams<S> {
    pub fn new(n: usize, p: usize, q: S) -> Result<Self> {
        if n == 0 {
            return Err(invalid("the ring needs at least one site"));
        }
        if p == 0 {
            return Err(invalid("at least one particle is required"));
        }
        Ok(ModelParams {
            n,
            p,
            q: QValue::new(q)?,
        })
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn particles(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> &QValue<S> {
        &self.q
    }

    pub fn context(&self) -> S::Context {
        self.q.context()
    }

    /// Mean density `p / N`.
    pub fn rho(&self) -> S {
        S::from_ratio(self.p as i64, self.n as i64, &self.context())
    }

    pub fn rho_f64(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    /// Same `q` on a different ring.
    pub fn resized(&self, n: usize, p: usize) -> Result<Self> {
        ModelParams::new(n, p, self.q.value().clone())
    }
}

/// Jump rate `[n]_q = 1 + q + ... + q^{n-1}`, equal to `n` at `q = 1`.
pub fn rate_u<S: Scalar>(n: usize, q: &S) -> S {
    let ctx = q.context();
    let mut acc = S::zero(&ctx);
    for _ in 0..n {
        acc = acc * q + &S::one(&ctx);
    }
    acc
}

/// One-site weight `f(m) = prod_{j<=m} 1/u(j)`, `f(0) = 1`.
pub fn weight_f<S: Scalar>(m: usize, q: &S) -> S {
    let ctx = q.context();
    (1..=m).fold(S::one(&ctx), |acc, j| acc / &rate_u(j, q))
}

/// Generating function `F(z) = sum f(m) z^m` truncated at `degree`.
pub fn weight_series<S: Scalar>(q: &S, degree: usize) -> TruncSeries<S> {
    let ctx = q.context();
    let mut coeffs = Vec::with_capacity(degree + 1);
    let mut f = S::one(&ctx);
    let mut u = S::zero(&ctx);
    coeffs.push(f.clone());
    for _ in 1..=degree {
        u = u * q + &S::one(&ctx);
        f = f / &u;
        coeffs.push(f.clone());
    }
    TruncSeries::new(coeffs)
}

/// Everything the exact cumulant formulas read from the stationary state.
#[derive(Clone, Debug)]
pub struct StationaryData<S: Scalar> {
    weights: TruncSeries<S>,
    grand: TruncSeries<S>,
    total_current: S,
    bond_current: S,
}

impl<S: Scalar> StationaryData<S> {
    /// Builds `F^N` to degree `2p`.
    pub fn build(params: &ModelParams<S>) -> Self {
        Self::with_degree(params, 2 * params.particles())
    }

    pub fn with_degree(params: &ModelParams<S>, degree: usize) -> Self {
        let degree = degree.max(params.particles());
        let weights = weight_series(params.q().value(), degree);
        let grand = weights.pow(params.sites() as u64);
        let p = params.particles();
        let n = S::from_usize(params.sites(), &params.context());
        let zp = grand.coeffs()[p].clone();
        let bond_current = grand.coeffs()[p - 1].clone() / &zp;
        let total_current = n * &bond_current;
        StationaryData {
            weights,
            grand,
            total_current,
            bond_current,
        }
    }

    pub fn weights(&self) -> &TruncSeries<S> {
        &self.weights
    }

    /// `F(z)^N` truncated at the build degree.
    pub fn grand_series(&self) -> &TruncSeries<S> {
        &self.grand
    }

    /// `Z(N, k)` for `k` up to the build degree.
    pub fn z(&self, k: usize) -> Result<&S> {
        self.grand.coeff(k)
    }

    pub fn z_values(&self) -> &[S] {
        self.grand.coeffs()
    }

    /// Integrated current `J`.
    pub fn current(&self) -> &S {
        &self.total_current
    }

    /// Bond current `j_N = J / N`.
    pub fn bond_current(&self) -> &S {
        &self.bond_current
    }
}

/// `Z(N, k)` for `k = 0..=pmax`.
pub fn partition_z<S: Scalar>(params: &ModelParams<S>, pmax: usize) -> Vec<S> {
    let data = StationaryData::with_degree(params, pmax.max(2 * params.particles()));
    data.z_values()[..=pmax].to_vec()
}

/// `J = N Z(N, p-1) / Z(N, p)`.
pub fn mean_current<S: Scalar>(params: &ModelParams<S>) -> S {
    StationaryData::with_degree(params, params.particles())
        .current()
        .clone()
}

/// Per-bond and per-particle versions of the extensive cumulants.
#[derive(Clone, Debug, PartialEq)]
pub struct Intensive<S: Scalar> {
    pub bond_current: S,
    pub bond_diffusion: Option<S>,
    pub particle_velocity: S,
    pub particle_diffusion: Option<S>,
}

pub fn intensive_quantities<S: Scalar>(
    params: &ModelParams<S>,
    current: &S,
    delta: Option<&S>,
) -> Intensive<S> {
    let ctx = params.context();
    let n = S::from_usize(params.sites(), &ctx);
    let rho = params.rho();
    let bond_current = current.clone() / &n;
    let particle_velocity = bond_current.clone() / &rho;
    let bond_diffusion = delta.map(|d| d.clone() / &(n.clone() * &n));
    let particle_diffusion = bond_diffusion
        .as_ref()
        .map(|d| d.clone() / &(rho.clone() * &rho));
    Intensive {
        bond_current,
        bond_diffusion,
        particle_velocity,
        particle_diffusion,
    }
}

/// Law of one site's occupation, `P(n_1 = m) = f(m) Z(N-1, p-m) / Z(N, p)`,
/// for `m = 0..=p`.
pub fn site_marginals<S: Scalar>(params: &ModelParams<S>) -> Result<Vec<S>> {
    let n = params.sites();
    if n < 2 {
        return Err(invalid(
            "site marginal needs N >= 2; on one site the occupation is p",
        ));
    }
    let p = params.particles();
    let weights = weight_series(params.q().value(), p);
    let rest = weights.pow((n - 1) as u64);
    let total = weights.mul(&rest)?;
    let zp = total.coeffs()[p].clone();
    Ok((0..=p)
        .map(|m| weights.coeffs()[m].clone() * &rest.coeffs()[p - m] / &zp)
        .collect())
}

pub fn site_marginal<S: Scalar>(params: &ModelParams<S>, m: usize) -> Result<S> {
    if m > params.particles() {
        return Err(Error::IndexOutOfRange {
            index: m,
            degree: params.particles(),
        });
    }
    Ok(site_marginals(params)?.swap_remove(m))
}

/// Mean (`k = 1`) or variance (`k = 2`) of one site's occupation.
pub fn occupation_moment<S: Scalar>(params: &ModelParams<S>, k: u32) -> Result<S> {
    let ctx = params.context();
    let probs = site_marginals(params)?;
    let mean = sum(
        probs
            .iter()
            .enumerate()
            .map(|(m, pr)| S::from_usize(m, &ctx) * pr),
        &ctx,
    );
    match k {
        1 => Ok(mean),
        2 => {
            let second = sum(
                probs
                    .iter()
                    .enumerate()
                    .map(|(m, pr)| S::from_usize(m * m, &ctx) * pr),
                &ctx,
            );
            Ok(second - &(mean.clone() * &mean))
        }
        _ => Err(invalid(format!(
            "occupation moment of order {k} is not supported"
        ))),
    }
}

/// Coefficients of `phi(z) = (J/p) (ln F)'(z) - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiSeries<S: Scalar> {
    coeffs: Vec<S>,
}

impl<S: Scalar> PhiSeries<S> {
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn as_series(&self) -> TruncSeries<S> {
        TruncSeries::new(self.coeffs.clone())
    }
}

/// `phi_m = (J/p) (1-q)^{m+1} / (1 - q^{m+1}) - [m = 0]` for `m = 0..=degree`.
pub fn phi_coefficients<S: Scalar>(
    params: &ModelParams<S>,
    current: &S,
    degree: usize,
) -> Result<PhiSeries<S>> {
    if params.q().is_unity() {
        return Err(Error::UnityRegime("phi series"));
    }
    let ctx = params.context();
    let q = params.q().value();
    let one = S::one(&ctx);
    let scale = current.clone() / &S::from_usize(params.particles(), &ctx);
    let one_minus_q = one.clone() - q;
    let mut num = one_minus_q.clone();
    let mut q_pow = q.clone();
    let mut coeffs = Vec::with_capacity(degree + 1);
    for m in 0..=degree {
        let mut c = scale.clone() * &num / &(one.clone() - &q_pow);
        if m == 0 {
            c = c - &one;
        }
        coeffs.push(c);
        num = num * &one_minus_q;
        q_pow = q_pow * q;
    }
    Ok(PhiSeries { coeffs })
}
