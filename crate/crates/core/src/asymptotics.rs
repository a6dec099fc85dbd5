//! Large-`N` behaviour at fixed density from the saddle point of
//! `h(z) = ln F(z) - rho ln z`, plus the crossover function that interpolates
//! between the diffusive and the KPZ regime.
//!
//! Everything here runs in `f64`. `ln F` is taken from its product form, which
//! converges for every admissible `z`:
//!
//! ```text
//! |q| < 1:  ln F = -sum_i ln(1 - w_i),   w_i = (1-q) q^i z
//! q > 1:    ln F =  sum_i ln(1 + v_i),   v_i = (1-1/q) q^{-i} z
//! q = 1:    ln F = z
//! ```

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Highest order of `(z d/dz)` supported.
pub const MAX_ORDER: usize = 4;
/// Product factors summed before [`log_f_log_derivative`] gives up.
pub const MAX_FACTORS: usize = 10_000_000;

const MAX_ITER: usize = 400;

fn check_q(q: f64) -> Result<()> {
    if !q.is_finite() || q <= -1.0 {
        return Err(Error::InvalidParameter(format!(
            "q = {q} must be finite and > -1"
        )));
    }
    Ok(())
}

/// `(x d/dx)^k` of `-ln(1 - x)`.
fn below_term(x: f64, k: usize) -> f64 {
    let d = 1.0 - x;
    match k {
        0 => -(-x).ln_1p(),
        1 => x / d,
        2 => x / (d * d),
        3 => x * (1.0 + x) / (d * d * d),
        _ => x * (1.0 + 4.0 * x + x * x) / (d * d * d * d),
    }
}

/// `(x d/dx)^k` of `ln(1 + x)`.
fn above_term(x: f64, k: usize) -> f64 {
    let d = 1.0 + x;
    match k {
        0 => x.ln_1p(),
        1 => x / d,
        2 => x / (d * d),
        3 => x * (1.0 - x) / (d * d * d),
        _ => x * (1.0 - 4.0 * x + x * x) / (d * d * d * d),
    }
}

/// `(z d/dz)^k ln F(z)` for `k = 0..=4`, with the product truncated once the
/// remaining factors contribute less than `tol`.
pub fn log_f_log_derivative(z: f64, q: f64, k: usize, tol: f64) -> Result<f64> {
    check_q(q)?;
    if k > MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "order {k} exceeds {MAX_ORDER}"
        )));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!("z = {z} must be positive")));
    }
    if q == 1.0 {
        return Ok(z);
    }
    let (mut x, ratio, term): (f64, f64, fn(f64, usize) -> f64) = if q < 1.0 {
        let x = (1.0 - q) * z;
        if x >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "z = {z} is at or beyond the singularity 1/(1-q) = {}",
                1.0 / (1.0 - q)
            )));
        }
        (x, q, below_term)
    } else {
        ((1.0 - 1.0 / q) * z, 1.0 / q, above_term)
    };
    let decay = ratio.abs();
    let mut total = 0.0;
    for _ in 0..MAX_FACTORS {
        total += term(x, k);
        x *= ratio;
        // for |x| <= 1/2 every term is at most 64 |x|
        if x.abs() <= 0.5 && 64.0 * x.abs() / (1.0 - decay) < tol {
            return Ok(total);
        }
        if x == 0.0 {
            return Ok(total);
        }
    }
    Err(Error::NoConvergence(format!(
        "ln F at q={q} needs more than {MAX_FACTORS} product factors"
    )))
}

/// `[h_0, .., h_4]` at `z`, with `h = ln F - rho ln z`.
pub fn h_values(z: f64, rho: f64, q: f64, tol: f64) -> Result<[f64; 5]> {
    let mut h = [0.0; 5];
    for (k, slot) in h.iter_mut().enumerate() {
        *slot = log_f_log_derivative(z, q, k, tol)?;
    }
    h[0] -= rho * z.ln();
    h[1] -= rho;
    Ok(h)
}

/// Upper end of the search interval for `z*`.
fn bracket_top(rho: f64, q: f64, tol: f64) -> Result<f64> {
    if q < 1.0 {
        return Ok(1.0 / (1.0 - q));
    }
    let mut hi = 1.0;
    for _ in 0..200 {
        if log_f_log_derivative(hi, q, 1, tol)? > rho {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::NoConvergence(
        "could not bracket the saddle point".into(),
    ))
}

/// Smallest positive root of `z (ln F)'(z) = rho`.
pub fn saddle_point(rho: f64, q: f64, tol: f64) -> Result<f64> {
    check_q(q)?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "rho = {rho} must be positive"
        )));
    }
    let inner_tol = tol * 1e-3;
    let g = |z: f64| log_f_log_derivative(z, q, 1, inner_tol).map(|v| v - rho);
    let mut lo = 0.0;
    let mut hi = bracket_top(rho, q, inner_tol)?;
    // bisection until the bracket is narrow, then Newton with dG/dz = h2/z
    let mut z = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let gz = g(z)?;
        if gz.abs() <= tol {
            return Ok(z);
        }
        if gz > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let slope = log_f_log_derivative(z, q, 2, inner_tol)? / z;
        let newton = z - gz / slope;
        z = if (hi - lo) < 1e-3 * hi && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::NoConvergence(format!(
        "saddle point for rho={rho}, q={q} not within {tol:e}"
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleData {
    pub rho: f64,
    pub q: f64,
    pub zstar: f64,
    /// `(z d/dz)^k h` at `z*`, `k = 0..=4`
    pub h: [f64; 5],
    pub free_energy: f64,
    pub j_inf: f64,
    pub lambda_nl: f64,
    pub amplitude: f64,
    /// `lim N (j_N - j_inf)`
    pub current_fss: f64,
}

pub fn saddle_data(rho: f64, q: f64, tol: f64) -> Result<SaddleData> {
    let zstar = saddle_point(rho, q, tol)?;
    let h = h_values(zstar, rho, q, tol * 1e-3)?;
    let (h2, h3) = (h[2], h[3]);
    if !(h2 > 0.0) {
        return Err(Error::Solver(format!(
            "h2 = {h2} is not positive at the saddle"
        )));
    }
    Ok(SaddleData {
        rho,
        q,
        zstar,
        h,
        free_energy: -h[0],
        j_inf: zstar,
        lambda_nl: (zstar / h2) * (1.0 / h2 - h3 / (h2 * h2)),
        amplitude: h2,
        current_fss: 0.5 * zstar * (h3 / (h2 * h2) - 1.0 / h2),
    })
}

/// `ln Z(N, rho N)` to relative order `1/N^2`.
pub fn log_partition_asymp(n: usize, saddle: &SaddleData) -> f64 {
    let nf = n as f64;
    let [h0, _, h2, h3, h4] = saddle.h;
    let correction = (h4 / (4.0 * h2 * h2) - 5.0 * h3 * h3 / (12.0 * h2 * h2 * h2)) / (2.0 * nf);
    nf * h0 - 0.5 * (2.0 * PI * nf * h2).ln() + correction.ln_1p()
}

pub fn partition_asymp(n: usize, saddle: &SaddleData) -> f64 {
    log_partition_asymp(n, saddle).exp()
}

/// Two-term expansion of `[z^p] g F^N / [z^p] F^N` given `g_k = (z d/dz)^k g`
/// at `z*`.
pub fn normalized_integral_expansion(g: [f64; 3], saddle: &SaddleData, n: usize) -> f64 {
    let (h2, h3) = (saddle.h[2], saddle.h[3]);
    g[0] + (h3 * g[1] / (h2 * h2) - g[2] / h2) / (2.0 * n as f64)
}

/// `j_N` to order `1/N`.
pub fn current_asymp(n: usize, saddle: &SaddleData) -> f64 {
    saddle.j_inf + saddle.current_fss / n as f64
}

/// Predicted `lim Delta / N^{3/2}`.
pub fn kpz_coefficient(saddle: &SaddleData) -> f64 {
    let (h2, h3) = (saddle.h[2], saddle.h[3]);
    PI.sqrt() / 4.0 * saddle.zstar * (h3 - h2).abs() / h2.powf(1.5)
}

/// The same constant written as `kappa A^{3/2} |lambda|`, `kappa = sqrt(pi)/4`.
pub fn kpz_from_amplitude(saddle: &SaddleData) -> f64 {
    PI.sqrt() / 4.0 * saddle.amplitude.powf(1.5) * saddle.lambda_nl.abs()
}

/// `(phi_1, phi_2)`: `(z d/dz)^k` of `phi = (z*/rho) (ln F)' - 1` at `z*`.
pub fn phi_derivatives(saddle: &SaddleData) -> (f64, f64) {
    let (rho, h2, h3) = (saddle.rho, saddle.h[2], saddle.h[3]);
    ((h2 - rho) / rho, (h3 - 2.0 * h2 + rho) / rho)
}

/// Alternative closed form `sqrt(pi) / (8 sqrt(h2)) (phi_1 h3 / |h2| - phi_2)`;
/// kept as a comparison channel next to [`kpz_coefficient`].
pub fn kpz_coefficient_phi_form(saddle: &SaddleData, phi1: f64, phi2: f64) -> f64 {
    let (h2, h3) = (saddle.h[2], saddle.h[3]);
    PI.sqrt() / (8.0 * h2.sqrt()) * (phi1 * h3 / h2.abs() - phi2)
}

const CUTOFF: f64 = 10.0;

/// `(sqrt(g)/(2 sqrt 2)) int_0^inf y^2 e^{-y^2} / tanh(sqrt(g/32) y) dy`.
///
/// Double-exponential quadrature on `[0, 10]`; the tail is bounded by
/// `coth(cY) (Y/2 + 1/(4Y)) e^{-Y^2}` and added to the error budget.
pub fn crossover_f(g: f64, quad_tol: f64) -> Result<f64> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::InvalidParameter(format!("g = {g} must be positive")));
    }
    let c = (g / 32.0).sqrt();
    let prefactor = g.sqrt() / (2.0 * 2f64.sqrt());
    let integrand = |y: f64| {
        let cy = c * y;
        // y / tanh(cy), continued through y = 0
        let ratio = if cy < 1e-6 {
            (1.0 + cy * cy / 3.0) / c
        } else {
            y / cy.tanh()
        };
        y * (-y * y).exp() * ratio
    };
    let out =
        quadrature::double_exponential::integrate(integrand, 0.0, CUTOFF, quad_tol / prefactor);
    let tail =
        (CUTOFF / 2.0 + 1.0 / (4.0 * CUTOFF)) * (-CUTOFF * CUTOFF).exp() / (c * CUTOFF).tanh();
    let err = prefactor * (out.error_estimate + tail);
    if !(err <= quad_tol) {
        return Err(Error::NoConvergence(format!(
            "crossover integral error {err:.3e} above {quad_tol:.3e} at g={g}"
        )));
    }
    Ok(prefactor * out.integral)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossoverData {
    pub rho: f64,
    pub alpha: f64,
    pub g: f64,
    pub d_ew: f64,
    pub nu_ew: f64,
    pub f_g: f64,
    /// Predicted `lim Delta / N` at `q = exp(-alpha / sqrt N)`.
    pub prediction: f64,
}

pub fn crossover_prediction(rho: f64, alpha: f64, quad_tol: f64) -> Result<CrossoverData> {
    if !(rho > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need rho > 0 and finite alpha, got rho={rho}, alpha={alpha}"
        )));
    }
    let g = 8.0 * rho * alpha * alpha;
    let f_g = if g == 0.0 {
        1.0
    } else {
        crossover_f(g, quad_tol)?
    };
    Ok(CrossoverData {
        rho,
        alpha,
        g,
        d_ew: rho,
        nu_ew: 0.5,
        f_g,
        prediction: rho * f_g,
    })
}

/// `q = exp(-alpha / sqrt N)`.
pub fn crossover_q(alpha: f64, n: usize) -> f64 {
    (-alpha / (n as f64).sqrt()).exp()
}
