//! Reference cumulants from the deformed generator on the full configuration
//! space.
//!
//! `L_gamma = L + (e^gamma - 1) K` where `K` holds the jump rates. Expanding
//! its Perron eigenvalue in `e = e^gamma - 1` gives `lambda = e m1 + e^2 m2`
//! with `m1 = <1, K pi>` and `m2 = <1, K psi>`, `L psi = (m1 - K) pi`,
//! `<1, psi> = 0`. Then `J = m1` and `Delta = m1 + 2 m2`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numerics::{relative_gap, BigReal, Precision, Scalar};
use crate::stationary::{rate_u, weight_f, ModelParams};

/// Default bound on the number of configurations the dense solver accepts.
pub const DEFAULT_STATE_CAP: usize = 3000;

/// All occupation vectors of `p` particles on `n` sites, in lexicographic
/// order (first site most significant, descending).
#[derive(Clone, Debug)]
pub struct ConfigSpace {
    sites: usize,
    configs: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

/// `C(n + p - 1, p)` without overflow for the sizes of interest.
pub fn config_count(n: usize, p: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..p as u128 {
        acc = acc * (n as u128 - 1 + p as u128 - i) / (i + 1);
        if acc > u128::from(u64::MAX) {
            return u128::MAX;
        }
    }
    acc
}

impl ConfigSpace {
    pub fn enumerate(n: usize, p: usize) -> Self {
        fn fill(site: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if site + 1 == cur.len() {
                cur[site] = left;
                out.push(cur.clone());
                return;
            }
            for m in (0..=left).rev() {
                cur[site] = m;
                fill(site + 1, left - m, cur, out);
            }
        }
        let mut configs = Vec::new();
        fill(0, p as u32, &mut vec![0; n], &mut configs);
        let index = configs
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        ConfigSpace {
            sites: n,
            configs,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn config(&self, i: usize) -> &[u32] {
        &self.configs[i]
    }

    pub fn index_of(&self, config: &[u32]) -> Option<usize> {
        self.index.get(config).copied()
    }
}

/// One jump channel: from state `from` to state `to` at `rate`, adding one
/// to the integrated current.
#[derive(Clone, Debug, PartialEq)]
pub struct Jump<S: Scalar> {
    pub from: usize,
    pub to: usize,
    pub rate: S,
}

/// Generator split into exit rates (minus the diagonal) and jumps.
#[derive(Clone, Debug)]
pub struct GeneratorPair<S: Scalar> {
    pub space: ConfigSpace,
    pub exit_rates: Vec<S>,
    pub jumps: Vec<Jump<S>>,
}

impl<S: Scalar> GeneratorPair<S> {
    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// `(K v)` for the jump part alone.
    pub fn apply_jumps(&self, v: &[S]) -> Vec<S> {
        let ctx = v[0].context();
        let mut out: Vec<S> = (0..v.len()).map(|_| S::zero(&ctx)).collect();
        for jump in &self.jumps {
            out[jump.to] = out[jump.to].clone() + &(jump.rate.clone() * &v[jump.from]);
        }
        out
    }

    /// `(L v)` for the full generator.
    pub fn apply(&self, v: &[S]) -> Vec<S> {
        let mut out = self.apply_jumps(v);
        for (i, o) in out.iter_mut().enumerate() {
            *o = o.clone() - &(self.exit_rates[i].clone() * &v[i]);
        }
        out
    }

    /// Dense copy of `L`, row-major.
    pub fn dense(&self) -> Vec<Vec<S>> {
        let m = self.len();
        let ctx = self.exit_rates[0].context();
        let mut a: Vec<Vec<S>> = (0..m)
            .map(|_| (0..m).map(|_| S::zero(&ctx)).collect())
            .collect();
        for jump in &self.jumps {
            a[jump.to][jump.from] = a[jump.to][jump.from].clone() + &jump.rate;
        }
        for (i, r) in self.exit_rates.iter().enumerate() {
            a[i][i] = a[i][i].clone() - r;
        }
        a
    }

    /// Column sums of `L`; all zero for a stochastic generator.
    pub fn column_sums(&self) -> Vec<S> {
        let ctx = self.exit_rates[0].context();
        let mut sums: Vec<S> = self.exit_rates.iter().map(|r| -r.clone()).collect();
        for jump in &self.jumps {
            sums[jump.from] = sums[jump.from].clone() + &jump.rate;
        }
        let _ = ctx;
        sums
    }
}

pub fn build_generator<S: Scalar>(params: &ModelParams<S>, cap: usize) -> Result<GeneratorPair<S>> {
    let (n, p) = (params.sites(), params.particles());
    let states = config_count(n, p);
    if states > cap as u128 {
        return Err(Error::StateSpaceTooLarge { states, cap });
    }
    let q = params.q().value();
    let ctx = params.context();
    let rates: Vec<S> = (0..=p).map(|k| rate_u(k, q)).collect();
    let space = ConfigSpace::enumerate(n, p);
    let mut exit_rates = Vec::with_capacity(space.len());
    let mut jumps = Vec::new();
    for from in 0..space.len() {
        let config = space.config(from);
        let mut total = S::zero(&ctx);
        for site in 0..n {
            let occ = config[site] as usize;
            if occ == 0 {
                continue;
            }
            let rate = rates[occ].clone();
            total = total + &rate;
            let mut next = config.to_vec();
            next[site] -= 1;
            next[(site + 1) % n] += 1;
            let to = space.index_of(&next).expect("jump stays in the sector");
            jumps.push(Jump { from, to, rate });
        }
        exit_rates.push(total);
    }
    Ok(GeneratorPair {
        space,
        exit_rates,
        jumps,
    })
}

/// Solve `[L 1; 1^T 0] [x; s] = [b; c]` by Gaussian elimination with
/// partial pivoting on magnitude.
fn solve_bordered<S: Scalar>(gen: &GeneratorPair<S>, rhs: &[S], total: S) -> Result<Vec<S>> {
    let m = gen.len();
    let ctx = total.context();
    let mut a = gen.dense();
    for (i, row) in a.iter_mut().enumerate() {
        row.push(S::one(&ctx));
        row.push(rhs[i].clone());
    }
    let mut last: Vec<S> = (0..m).map(|_| S::one(&ctx)).collect();
    last.push(S::zero(&ctx));
    last.push(total);
    a.push(last);

    let dim = m + 1;
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty range");
        if a[pivot][col].is_zero() {
            return Err(Error::Solver(format!(
                "bordered generator is singular at column {col}"
            )));
        }
        a.swap(col, pivot);
        let inv = S::one(&ctx) / &a[col][col];
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for target in lower.iter_mut() {
            if target[col].is_zero() {
                continue;
            }
            let factor = target[col].clone() * &inv;
            for (t, pv) in target[col..].iter_mut().zip(&pivot_row[col..]) {
                *t = t.clone() - &(pv.clone() * &factor);
            }
        }
    }
    let mut x: Vec<S> = (0..dim).map(|_| S::zero(&ctx)).collect();
    for row in (0..dim).rev() {
        let mut acc = a[row][dim].clone();
        for k in row + 1..dim {
            acc = acc - &(a[row][k].clone() * &x[k]);
        }
        x[row] = acc / &a[row][row];
    }
    x.truncate(m);
    Ok(x)
}

fn residual_norm<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.abs().to_f64()).fold(0.0, f64::max)
}

fn solver_tolerance<S: Scalar>(ctx: &S::Context) -> f64 {
    match S::backend(ctx) {
        crate::numerics::Backend::Rational => 0.0,
        crate::numerics::Backend::Float(p) => p.epsilon() * 2f64.powi(40),
    }
}

/// Solves `L pi = 0`, `sum pi = 1`.
pub fn stationary_vector<S: Scalar>(gen: &GeneratorPair<S>) -> Result<Vec<S>> {
    let ctx = gen.exit_rates[0].context();
    let zeros: Vec<S> = (0..gen.len()).map(|_| S::zero(&ctx)).collect();
    let pi = solve_bordered(gen, &zeros, S::one(&ctx))?;
    let res = residual_norm(&gen.apply(&pi));
    if res > solver_tolerance::<S>(&ctx) {
        return Err(Error::Solver(format!("stationary residual {res:.3e}")));
    }
    Ok(pi)
}

/// Normalized product measure `prod f(n_i) / Z`.
pub fn product_form_vector<S: Scalar>(gen: &GeneratorPair<S>, params: &ModelParams<S>) -> Vec<S> {
    let q = params.q().value();
    let ctx = params.context();
    let weights: Vec<S> = (0..=params.particles()).map(|m| weight_f(m, q)).collect();
    let raw: Vec<S> = (0..gen.len())
        .map(|i| {
            gen.space
                .config(i)
                .iter()
                .fold(S::one(&ctx), |acc, &m| acc * &weights[m as usize])
        })
        .collect();
    let z = raw.iter().fold(S::zero(&ctx), |acc, x| acc + x);
    raw.into_iter().map(|x| x / &z).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaDerivatives<S: Scalar> {
    /// `lambda'(0) = J`
    pub lambda1: S,
    /// `lambda''(0) / 2`
    pub lambda2: S,
    pub delta: S,
}

pub fn lambda_derivatives<S: Scalar>(
    gen: &GeneratorPair<S>,
    pi: &[S],
) -> Result<LambdaDerivatives<S>> {
    let ctx = pi[0].context();
    let m1 = gen
        .exit_rates
        .iter()
        .zip(pi)
        .fold(S::zero(&ctx), |acc, (r, x)| acc + &(r.clone() * x));
    let k_pi = gen.apply_jumps(pi);
    let rhs: Vec<S> = pi
        .iter()
        .zip(&k_pi)
        .map(|(x, kx)| m1.clone() * x - kx)
        .collect();
    let psi = solve_bordered(gen, &rhs, S::zero(&ctx))?;
    let lhs = gen.apply(&psi);
    let res = residual_norm(
        &lhs.iter()
            .zip(&rhs)
            .map(|(a, b)| a.clone() - b)
            .collect::<Vec<_>>(),
    );
    if res > solver_tolerance::<S>(&ctx) * (1.0 + residual_norm(&rhs)) {
        return Err(Error::Solver(format!(
            "perturbation solve residual {res:.3e}"
        )));
    }
    let m2 = gen
        .exit_rates
        .iter()
        .zip(&psi)
        .fold(S::zero(&ctx), |acc, (r, x)| acc + &(r.clone() * x));
    let two = S::from_i64(2, &ctx);
    let lambda2 = m1.clone() / &two + &m2;
    let delta = two * &lambda2;
    Ok(LambdaDerivatives {
        lambda1: m1,
        lambda2,
        delta,
    })
}

/// Reference `(J, Delta)` for one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<S: Scalar> {
    pub current: S,
    pub delta: S,
    pub states: usize,
    /// Largest componentwise gap between the solved stationary vector and
    /// the product measure.
    pub product_form_gap: f64,
}

pub fn oracle<S: Scalar>(params: &ModelParams<S>, cap: usize) -> Result<OracleResult<S>> {
    let gen = build_generator(params, cap)?;
    let pi = stationary_vector(&gen)?;
    let product = product_form_vector(&gen, params);
    let gap = pi
        .iter()
        .zip(&product)
        .map(|(a, b)| relative_gap(a, b))
        .fold(0.0, f64::max);
    let d = lambda_derivatives(&gen, &pi)?;
    Ok(OracleResult {
        current: d.lambda1,
        delta: d.delta,
        states: gen.len(),
        product_form_gap: gap,
    })
}

/// Perron eigenvalue of `L_gamma` by power iteration on `L_gamma + c I`
/// with `c` the largest exit rate, carried out at `prec` bits.
pub fn lambda_gamma<S: Scalar>(
    gen: &GeneratorPair<S>,
    gamma: f64,
    prec: Precision,
) -> Result<BigReal> {
    let m = gen.len();
    let g = BigReal::from_f64(gamma, prec)
        .ok_or_else(|| Error::InvalidParameter("gamma must be finite".into()))?;
    let one = BigReal::from_i64(1, prec);
    let tilt = g.exp() - &one;
    let exits: Vec<BigReal> = gen.exit_rates.iter().map(|r| r.to_real(prec)).collect();
    let jumps: Vec<(usize, usize, BigReal)> = gen
        .jumps
        .iter()
        .map(|j| (j.from, j.to, j.rate.to_real(prec) * &(one.clone() + &tilt)))
        .collect();
    let shift = exits
        .iter()
        .cloned()
        .fold(BigReal::zero(prec), |a, b| if b > a { b } else { a })
        + &one;

    let mut v: Vec<BigReal> = (0..m).map(|_| one.clone()).collect();
    let mut estimate = BigReal::zero(prec);
    let tol = 2f64.powi(-(prec.bits() as i32 - 16));
    for _ in 0..1_000_000 {
        let mut w: Vec<BigReal> = v
            .iter()
            .zip(&exits)
            .map(|(x, r)| x.clone() * &(shift.clone() - r))
            .collect();
        for (from, to, rate) in &jumps {
            w[*to] = w[*to].clone() + &(rate.clone() * &v[*from]);
        }
        let norm_v = v.iter().fold(BigReal::zero(prec), |a, x| a + x);
        let norm_w = w.iter().fold(BigReal::zero(prec), |a, x| a + x);
        let next = norm_w.clone() / &norm_v - &shift;
        let change = (next.clone() - &estimate).abs().to_f64();
        estimate = next;
        v = w.into_iter().map(|x| x / &norm_w).collect();
        if change <= tol * (1.0 + estimate.abs().to_f64()) {
            return Ok(estimate);
        }
    }
    Err(Error::NoConvergence(format!(
        "power iteration for lambda({gamma}) did not settle"
    )))
}

/// `(lambda'(0), lambda''(0))` by central differences at step `eps` and
/// `eps / 2`, combined by Richardson extrapolation.
pub fn lambda_fd_cumulants<S: Scalar>(
    gen: &GeneratorPair<S>,
    eps: f64,
    prec: Precision,
) -> Result<(f64, f64)> {
    let lam0 = lambda_gamma(gen, 0.0, prec)?;
    let diffs = |h: f64| -> Result<(BigReal, BigReal)> {
        let plus = lambda_gamma(gen, h, prec)?;
        let minus = lambda_gamma(gen, -h, prec)?;
        let hh = BigReal::from_f64(h, prec).expect("finite step");
        let first = (plus.clone() - &minus) / &(hh.clone() * &BigReal::from_i64(2, prec));
        let second =
            (plus + &minus - &(lam0.clone() * &BigReal::from_i64(2, prec))) / &(hh.clone() * &hh);
        Ok((first, second))
    };
    let (d1_h, d2_h) = diffs(eps)?;
    let (d1_half, d2_half) = diffs(eps / 2.0)?;
    let three = BigReal::from_i64(3, prec);
    let four = BigReal::from_i64(4, prec);
    let d1 = (four.clone() * &d1_half - &d1_h) / &three;
    let d2 = (four * &d2_half - &d2_h) / &three;
    Ok((d1.to_f64(), d2.to_f64()))
}
