//! Brute-force references shared by the integration tests. Nothing here calls
//! into the library, so agreement is a genuine cross-check.

#![allow(dead_code)]

use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// All occupation vectors of `p` particles on `n` sites.
pub fn configs(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(site: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if site + 1 == cur.len() {
            cur[site] = left;
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[site] = k;
            rec(site + 1, left - k, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(0, p, &mut vec![0; n], &mut out);
    out
}

pub fn rate_f64(k: usize, q: f64) -> f64 {
    (0..k).map(|i| q.powi(i as i32)).sum()
}

pub fn rate_rat(k: usize, q: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    let mut pw = BigRational::one();
    for _ in 0..k {
        acc += &pw;
        pw *= q;
    }
    acc
}

pub fn weight_rat(m: usize, q: &BigRational) -> BigRational {
    (1..=m).fold(BigRational::one(), |acc, j| acc / rate_rat(j, q))
}

/// Stationary current from an explicit sum over the product measure.
pub fn brute_current(n: usize, p: usize, q: &BigRational) -> BigRational {
    let (mut z, mut flux) = (BigRational::zero(), BigRational::zero());
    for c in configs(n, p) {
        let w = c
            .iter()
            .fold(BigRational::one(), |acc, &m| acc * weight_rat(m, q));
        let out: BigRational = c.iter().map(|&m| rate_rat(m, q)).sum();
        flux += &w * out;
        z += w;
    }
    flux / z
}

/// Probability that a given site holds `m` particles, by enumeration.
pub fn brute_marginal(n: usize, p: usize, q: &BigRational) -> Vec<BigRational> {
    let mut mass = vec![BigRational::zero(); p + 1];
    let mut z = BigRational::zero();
    for c in configs(n, p) {
        let w = c
            .iter()
            .fold(BigRational::one(), |acc, &m| acc * weight_rat(m, q));
        mass[c[0]] += &w;
        z += w;
    }
    mass.into_iter().map(|x| x / &z).collect()
}

type Matrix = Vec<Vec<f64>>;

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

/// Largest eigenvalue of the generator with every jump weighted by `e^gamma`,
/// from repeated squaring of the shifted matrix.
pub fn tilted_top_eigenvalue(n: usize, p: usize, q: f64, gamma: f64) -> f64 {
    let states = configs(n, p);
    let index = |c: &Vec<usize>| states.iter().position(|s| s == c).unwrap();
    let dim = states.len();
    let mut m = vec![vec![0.0; dim]; dim];
    let mut shift: f64 = 0.0;
    for (col, c) in states.iter().enumerate() {
        let mut exit = 0.0;
        for i in 0..n {
            if c[i] == 0 {
                continue;
            }
            let r = rate_f64(c[i], q);
            exit += r;
            let mut d = c.clone();
            d[i] -= 1;
            d[(i + 1) % n] += 1;
            m[index(&d)][col] += r * gamma.exp();
        }
        m[col][col] -= exit;
        shift = shift.max(exit);
    }
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += shift;
    }
    let mut a = m.clone();
    for _ in 0..80 {
        a = matmul(&a, &a);
        let top = a.iter().flatten().fold(0.0f64, |x, &y| x.max(y.abs()));
        for v in a.iter_mut().flatten() {
            *v /= top;
        }
    }
    // any column of a high power is the Perron vector
    let v: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let mv: Vec<f64> = m
        .iter()
        .map(|row| row.iter().zip(&v).map(|(x, y)| x * y).sum())
        .collect();
    let (num, den): (f64, f64) = (mv.iter().sum(), v.iter().sum());
    num / den - shift
}

/// `(lambda'(0), lambda''(0))` by Richardson-extrapolated central differences.
pub fn fd_cumulants(n: usize, p: usize, q: f64, h: f64) -> (f64, f64) {
    let lam = |g: f64| tilted_top_eigenvalue(n, p, q, g);
    let l0 = lam(0.0);
    let first = |h: f64| (lam(h) - lam(-h)) / (2.0 * h);
    let second = |h: f64| (lam(h) - 2.0 * l0 + lam(-h)) / (h * h);
    (
        (4.0 * first(h / 2.0) - first(h)) / 3.0,
        (4.0 * second(h / 2.0) - second(h)) / 3.0,
    )
}

/// Upper chi-square quantile by the Wilson-Hilferty approximation.
pub fn chi_square_quantile(dof: usize, z: f64) -> f64 {
    let k = dof as f64;
    let a = 2.0 / (9.0 * k);
    k * (1.0 - a + z * a.sqrt()).powi(3)
}
