//! Event-driven simulation of the process on a ring and replica estimates of
//! `J` and `Delta`.
//!
//! Site rates live in a sum tree whose internal nodes are always
//! `left + right`, so the running total can be compared bit for bit with a
//! tree rebuilt from scratch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// Exact draw from the product measure conditioned on `p` particles.
    StationaryProduct,
    /// Particles spread as evenly as possible.
    AllEqual,
    /// Every particle on site 0.
    SinglePile,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    pub q: f64,
    pub t_burn: f64,
    pub t_measure: f64,
    pub reps: usize,
    pub seed: u64,
    pub init: Init,
    /// Number of equal sub-windows used for the batch-means diagnostic.
    pub batches: usize,
}

impl SimConfig {
    /// Defaults: `t_burn = 10 N^2`, stationary start, 10 batches.
    pub fn new(n: usize, p: usize, q: f64, t_measure: f64, reps: usize, seed: u64) -> Self {
        SimConfig {
            n,
            p,
            q,
            t_burn: 10.0 * (n * n) as f64,
            t_measure,
            reps,
            seed,
            init: Init::StationaryProduct,
            batches: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 || self.p == 0 {
            return bad(format!(
                "need N >= 1 and p >= 1, got N={} p={}",
                self.n, self.p
            ));
        }
        if !self.q.is_finite() || self.q <= -1.0 {
            return bad(format!("q = {} must be finite and > -1", self.q));
        }
        if !(self.t_burn >= 0.0) || !(self.t_measure > 0.0) {
            return bad("t_burn must be >= 0 and t_measure > 0".into());
        }
        if self.reps < 2 {
            return bad("at least two replicas are needed for a variance".into());
        }
        if self.batches == 0 {
            return bad("batches must be positive".into());
        }
        Ok(())
    }

    fn rates(&self) -> Vec<f64> {
        (0..=self.p).map(|k| rate(k, self.q)).collect()
    }
}

/// `[k]_q = 1 + q + ... + q^{k-1}`.
fn rate(k: usize, q: f64) -> f64 {
    (0..k).fold(0.0, |acc, _| acc * q + 1.0)
}

/// `f(m) = 1 / ([1]_q ... [m]_q)`.
fn weight(m: usize, q: f64) -> f64 {
    (1..=m).fold(1.0, |acc, j| acc / rate(j, q))
}

/// Binary sum tree over per-site rates.
#[derive(Clone, Debug)]
struct RateTree {
    size: usize,
    nodes: Vec<f64>,
}

impl RateTree {
    fn new(leaves: &[f64]) -> Self {
        let size = leaves.len().next_power_of_two();
        let mut nodes = vec![0.0; 2 * size];
        nodes[size..size + leaves.len()].copy_from_slice(leaves);
        for i in (1..size).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        RateTree { size, nodes }
    }

    fn total(&self) -> f64 {
        self.nodes[1]
    }

    fn set(&mut self, site: usize, value: f64) {
        let mut i = site + self.size;
        self.nodes[i] = value;
        while i > 1 {
            i /= 2;
            self.nodes[i] = self.nodes[2 * i] + self.nodes[2 * i + 1];
        }
    }

    /// Leaf whose cumulative range contains `target`.
    fn find(&self, mut target: f64) -> usize {
        let mut i = 1;
        while i < self.size {
            let left = self.nodes[2 * i];
            if target < left || self.nodes[2 * i + 1] == 0.0 {
                i *= 2;
            } else {
                target -= left;
                i = 2 * i + 1;
            }
        }
        i - self.size
    }
}

/// One ring and its clock.
#[derive(Clone, Debug)]
pub struct Ring {
    occupation: Vec<u32>,
    rates: Vec<f64>,
    tree: RateTree,
    time: f64,
    current: u64,
    events: u64,
}

impl Ring {
    fn new(occupation: Vec<u32>, rates: Vec<f64>) -> Self {
        let leaves: Vec<f64> = occupation.iter().map(|&m| rates[m as usize]).collect();
        let tree = RateTree::new(&leaves);
        Ring {
            occupation,
            rates,
            tree,
            time: 0.0,
            current: 0,
            events: 0,
        }
    }

    pub fn occupation(&self) -> &[u32] {
        &self.occupation
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Integrated current: total number of jumps so far.
    pub fn current(&self) -> u64 {
        self.current
    }

    /// Whether the maintained total equals a rebuild from scratch, bit for bit.
    pub fn rates_consistent(&self) -> bool {
        let leaves: Vec<f64> = self
            .occupation
            .iter()
            .map(|&m| self.rates[m as usize])
            .collect();
        RateTree::new(&leaves).nodes == self.tree.nodes
    }

    /// Advances until `t_end`; the jump that would cross `t_end` is discarded,
    /// which is exact by memorylessness.
    fn run_until(&mut self, t_end: f64, rng: &mut ChaCha8Rng) {
        let n = self.occupation.len();
        loop {
            let total = self.tree.total();
            let wait: f64 = rng.sample::<f64, _>(Exp1) / total;
            if self.time + wait > t_end {
                self.time = t_end;
                return;
            }
            self.time += wait;
            let site = self.tree.find(rng.random::<f64>() * total);
            let next = (site + 1) % n;
            self.occupation[site] -= 1;
            self.occupation[next] += 1;
            self.tree
                .set(site, self.rates[self.occupation[site] as usize]);
            self.tree
                .set(next, self.rates[self.occupation[next] as usize]);
            self.current += 1;
            self.events += 1;
            if self.events.is_multiple_of(1_000_000) {
                debug_assert!(self.rates_consistent());
            }
        }
    }
}

/// Exact sample of the conditioned product measure, one site at a time:
/// `P(n_1 = m) = f(m) Z(N-1, p-m) / Z(N, p)`.
pub fn sample_stationary(n: usize, p: usize, q: f64, rng: &mut impl Rng) -> Vec<u32> {
    let f: Vec<f64> = (0..=p).map(|m| weight(m, q)).collect();
    // z[s][k] = Z(s, k) / max_k Z(s, k); each row only matters up to a constant
    let mut z = vec![vec![0.0; p + 1]; n];
    z[0][0] = 1.0;
    for s in 1..n {
        for k in 0..=p {
            z[s][k] = (0..=k).map(|m| f[m] * z[s - 1][k - m]).sum();
        }
        let top = z[s].iter().cloned().fold(0.0, f64::max);
        z[s].iter_mut().for_each(|v| *v /= top);
    }
    let mut occ = vec![0u32; n];
    let mut left = p;
    for (site, slot) in occ.iter_mut().enumerate().take(n - 1) {
        let rest = n - 1 - site;
        let weights: Vec<f64> = (0..=left).map(|m| f[m] * z[rest][left - m]).collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = left;
        for (m, w) in weights.iter().enumerate() {
            if u < *w {
                pick = m;
                break;
            }
            u -= w;
        }
        *slot = pick as u32;
        left -= pick;
    }
    occ[n - 1] = left as u32;
    occ
}

fn initial_config(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Vec<u32> {
    match cfg.init {
        Init::StationaryProduct => sample_stationary(cfg.n, cfg.p, cfg.q, rng),
        Init::AllEqual => (0..cfg.n)
            .map(|i| (cfg.p / cfg.n + usize::from(i < cfg.p % cfg.n)) as u32)
            .collect(),
        Init::SinglePile => {
            let mut occ = vec![0; cfg.n];
            occ[0] = cfg.p as u32;
            occ
        }
    }
}

/// Replica `rep` draws from its own ChaCha stream of `seed`.
pub fn replica_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub y_burn: u64,
    pub y_end: u64,
    /// Jumps in each of the `batches` equal sub-windows of the measurement.
    pub batch_counts: Vec<u64>,
    pub final_config: Vec<u32>,
    pub events: u64,
    pub rates_consistent: bool,
}

pub fn run_trajectory(cfg: &SimConfig, rep: u64) -> Result<Trajectory> {
    cfg.validate()?;
    let mut rng = replica_rng(cfg.seed, rep);
    let occ = initial_config(cfg, &mut rng);
    let mut ring = Ring::new(occ, cfg.rates());
    ring.run_until(cfg.t_burn, &mut rng);
    let y_burn = ring.current();
    let mut batch_counts = Vec::with_capacity(cfg.batches);
    let step = cfg.t_measure / cfg.batches as f64;
    let mut last = y_burn;
    for b in 1..=cfg.batches {
        let t = if b == cfg.batches {
            cfg.t_burn + cfg.t_measure
        } else {
            cfg.t_burn + step * b as f64
        };
        ring.run_until(t, &mut rng);
        batch_counts.push(ring.current() - last);
        last = ring.current();
    }
    Ok(Trajectory {
        y_burn,
        y_end: ring.current(),
        batch_counts,
        final_config: ring.occupation().to_vec(),
        events: ring.events,
        rates_consistent: ring.rates_consistent(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimEstimate {
    pub j_hat: f64,
    pub se_j: f64,
    pub delta_hat: f64,
    pub se_delta: f64,
    /// Mean over replicas of the within-trajectory batch-means `Delta`.
    pub delta_batch_means: f64,
    pub reps: usize,
    pub total_events: u64,
}

/// Mean and unbiased variance of integer samples from exact integer sums.
fn mean_var(w: &[u64]) -> (f64, f64) {
    let n = w.len() as f64;
    let s1: u128 = w.iter().map(|&x| x as u128).sum();
    let s2: u128 = w.iter().map(|&x| (x as u128) * (x as u128)).sum();
    let mean = s1 as f64 / n;
    // n s2 - s1^2 >= 0 exactly
    let centered = (w.len() as u128 * s2 - s1 * s1) as f64;
    (mean, centered / (n * (n - 1.0)))
}

/// Jackknife standard error of `stat` over leave-one-out subsamples.
fn jackknife(w: &[u64], stat: impl Fn(&[u64]) -> f64) -> f64 {
    let n = w.len();
    let mut buf = Vec::with_capacity(n - 1);
    let values: Vec<f64> = (0..n)
        .map(|i| {
            buf.clear();
            buf.extend(
                w.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, &x)| x),
            );
            stat(&buf)
        })
        .collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss * (n - 1) as f64 / n as f64).sqrt()
}

pub fn estimate_from(cfg: &SimConfig, runs: &[Trajectory]) -> SimEstimate {
    let t = cfg.t_measure;
    let w: Vec<u64> = runs.iter().map(|r| r.y_end - r.y_burn).collect();
    let (mean, var) = mean_var(&w);
    let se_j = jackknife(&w, |s| mean_var(s).0 / t);
    let se_delta = if w.len() > 2 {
        jackknife(&w, |s| mean_var(s).1 / t)
    } else {
        f64::NAN
    };
    let batch_len = t / cfg.batches as f64;
    let delta_batch_means = if cfg.batches > 1 {
        runs.iter()
            .map(|r| mean_var(&r.batch_counts).1 / batch_len)
            .sum::<f64>()
            / runs.len() as f64
    } else {
        f64::NAN
    };
    SimEstimate {
        j_hat: mean / t,
        se_j,
        delta_hat: var / t,
        se_delta,
        delta_batch_means,
        reps: w.len(),
        total_events: runs.iter().map(|r| r.events).sum(),
    }
}

/// All replicas, run in parallel and returned in replica order.
pub fn run_replicas(cfg: &SimConfig) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| run_trajectory(cfg, rep))
        .collect()
}

pub fn estimate_cumulants(cfg: &SimConfig) -> Result<SimEstimate> {
    let runs = run_replicas(cfg)?;
    Ok(estimate_from(cfg, &runs))
}

/// Pearson statistic of observed counts against expected probabilities,
/// pooling the cells with expectation below 5 into one. Returns
/// `(chi2, degrees of freedom)`.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    let total: u64 = counts.iter().sum();
    let total = total as f64;
    let mut chi2 = 0.0;
    let mut cells: usize = 0;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (i, &p) in probs.iter().enumerate() {
        let obs = counts.get(i).copied().unwrap_or(0) as f64;
        let exp = p * total;
        if exp < 5.0 {
            pooled_obs += obs;
            pooled_exp += exp;
        } else {
            chi2 += (obs - exp) * (obs - exp) / exp;
            cells += 1;
        }
    }
    if pooled_exp > 0.0 {
        chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
        cells += 1;
    }
    (chi2, cells.saturating_sub(1))
}
