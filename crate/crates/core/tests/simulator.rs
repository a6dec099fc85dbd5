mod common;

use common::{brute_marginal, chi_square_quantile, rat};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use qboson::simulator::{
    chi_square, estimate_cumulants, replica_rng, run_replicas, sample_stationary, Init, SimConfig,
};

// two-sided 99.9% normal quantile and one-sided 99.95% for chi-square
const Z_SE: f64 = 3.3;
const Z_CHI: f64 = 3.29;

fn within(est: f64, se: f64, target: f64) -> bool {
    (est - target).abs() <= Z_SE * se
}

#[test]
fn single_particle_is_poisson() {
    for q in [0.5, 2.0] {
        let est = estimate_cumulants(&SimConfig::new(5, 1, q, 400.0, 200, 11)).unwrap();
        assert!(within(est.j_hat, est.se_j, 1.0), "{est:?}");
        assert!(within(est.delta_hat, est.se_delta, 1.0), "{est:?}");
    }
}

#[test]
fn free_particles_at_q_one() {
    let est = estimate_cumulants(&SimConfig::new(4, 3, 1.0, 400.0, 200, 5)).unwrap();
    assert!(within(est.j_hat, est.se_j, 3.0), "{est:?}");
    assert!(within(est.delta_hat, est.se_delta, 3.0), "{est:?}");
}

#[test]
fn one_site_two_particles() {
    // a single site with two particles jumps at rate 1 + q
    let q = 0.5;
    let est = estimate_cumulants(&SimConfig::new(1, 2, q, 400.0, 200, 3)).unwrap();
    assert!(within(est.j_hat, est.se_j, 1.0 + q), "{est:?}");
    assert!(within(est.delta_hat, est.se_delta, 1.0 + q), "{est:?}");
}

#[test]
fn same_seed_same_result() {
    let cfg = SimConfig::new(6, 4, 0.3, 50.0, 8, 99);
    let a = estimate_cumulants(&cfg).unwrap();
    assert_eq!(a, estimate_cumulants(&cfg).unwrap());
    let other = SimConfig { seed: 100, ..cfg };
    assert_ne!(a, estimate_cumulants(&other).unwrap());
}

#[test]
fn rate_tree_stays_consistent() {
    let mut cfg = SimConfig::new(7, 9, 1.7, 30.0, 6, 1);
    cfg.init = Init::AllEqual;
    for t in run_replicas(&cfg).unwrap() {
        assert!(t.rates_consistent);
        assert_eq!(t.final_config.iter().sum::<u32>(), 9);
    }
}

fn marginal_probs(n: usize, p: usize, q: &BigRational) -> Vec<f64> {
    brute_marginal(n, p, q)
        .iter()
        .map(|x| x.to_f64().unwrap())
        .collect()
}

fn histogram(samples: impl Iterator<Item = u32>, p: usize) -> Vec<u64> {
    let mut counts = vec![0u64; p + 1];
    for m in samples {
        counts[m as usize] += 1;
    }
    counts
}

#[test]
fn stationary_sampler_has_the_right_marginal() {
    let (n, p, q) = (4, 6, rat(1, 2));
    let mut rng = replica_rng(2024, 0);
    let counts = histogram(
        (0..20_000).map(|_| sample_stationary(n, p, 0.5, &mut rng)[0]),
        p,
    );
    let (chi2, dof) = chi_square(&counts, &marginal_probs(n, p, &q));
    assert!(
        chi2 <= chi_square_quantile(dof, Z_CHI),
        "chi2={chi2} dof={dof}"
    );
}

#[test]
fn dynamics_relax_from_a_single_pile() {
    let (n, p, q) = (3, 4, rat(2, 1));
    let mut cfg = SimConfig::new(n, p, 2.0, 1.0, 3000, 77);
    cfg.init = Init::SinglePile;
    cfg.t_burn = 40.0;
    let runs = run_replicas(&cfg).unwrap();
    let counts = histogram(runs.iter().map(|t| t.final_config[0]), p);
    let (chi2, dof) = chi_square(&counts, &marginal_probs(n, p, &q));
    assert!(
        chi2 <= chi_square_quantile(dof, Z_CHI),
        "chi2={chi2} dof={dof}"
    );
}

#[test]
fn chi_square_pools_sparse_cells() {
    let (chi2, dof) = chi_square(&[50, 50, 1, 0], &[0.5, 0.5, 0.005, 0.005]);
    assert_eq!(dof, 2);
    assert!(chi2 >= 0.0);
}

#[test]
fn invalid_configurations_are_rejected() {
    assert!(SimConfig::new(0, 1, 0.5, 1.0, 4, 0).validate().is_err());
    assert!(SimConfig::new(3, 1, -1.0, 1.0, 4, 0).validate().is_err());
    assert!(SimConfig::new(3, 1, 0.5, 1.0, 1, 0).validate().is_err());
}
