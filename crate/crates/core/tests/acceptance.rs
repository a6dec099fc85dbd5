//! The twelve acceptance criteria. Runs without the libtest harness so each
//! criterion prints exactly one PASS/FAIL line; the process fails if any
//! criterion does.

use std::time::Instant;

use num_rational::BigRational;
use qboson::asymptotics::{
    crossover_f, crossover_prediction, crossover_q, kpz_coefficient, kpz_coefficient_phi_form,
    phi_derivatives, saddle_data,
};
use qboson::cumulants::{delta_exact_resummed, delta_exact_truncated, delta_fss_estimate, Method};
use qboson::numerics::{relative_gap, BigReal, Precision, Scalar};
use qboson::oracle::{oracle, DEFAULT_STATE_CAP};
use qboson::simulator::{estimate_cumulants, SimConfig};
use qboson::stationary::ModelParams;
use qboson::tq::{tq_first_order, verify_tq_first_order};

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn rparams(n: usize, p: usize, q: &BigRational) -> ModelParams<BigRational> {
    ModelParams::new(n, p, q.clone()).unwrap()
}

fn fparams(n: usize, p: usize, q: f64, prec: Precision) -> ModelParams<BigReal> {
    ModelParams::new(n, p, BigReal::from_f64(q, prec).unwrap()).unwrap()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn c1_one_particle() -> Outcome {
    let qs = [
        rat(-1, 2),
        rat(0, 1),
        rat(1, 3),
        rat(1, 2),
        rat(2, 1),
        rat(3, 1),
    ];
    let mut bad = Vec::new();
    for q in &qs {
        for n in 1..=8 {
            let d = delta_exact_resummed(&rparams(n, 1, q)).unwrap();
            if d.delta != rat(1, 1) || d.current != rat(1, 1) {
                bad.push(format!("N={n} q={q}"));
            }
        }
    }
    (
        bad.is_empty(),
        format!("48 cases, exact equality; failures {bad:?}"),
    )
}

fn c2_oracle_equivalence() -> Outcome {
    let sizes = [(1, 2), (2, 2), (3, 2), (2, 3), (3, 3), (4, 3), (4, 4)];
    let qs = [rat(-1, 2), rat(0, 1), rat(1, 2), rat(2, 1)];
    let prec = Precision::new(256);
    let mut bad = Vec::new();
    let mut worst_float: f64 = 0.0;
    for &(n, p) in &sizes {
        for q in &qs {
            let pr = rparams(n, p, q);
            let exact = delta_exact_resummed(&pr).unwrap();
            let orc = oracle(&pr, DEFAULT_STATE_CAP).unwrap();
            if exact.current != orc.current || exact.delta != orc.delta {
                bad.push(format!("rational N={n} p={p} q={q}"));
            }
            let fp = ModelParams::new(n, p, BigReal::from_rational(q, prec)).unwrap();
            let fe = delta_exact_resummed(&fp).unwrap();
            let fo = oracle(&fp, DEFAULT_STATE_CAP).unwrap();
            let gap = (fe.current.clone() - &fo.current)
                .abs()
                .to_f64()
                .max((fe.delta.clone() - &fo.delta).abs().to_f64());
            worst_float = worst_float.max(gap);
            if gap > 1e-8 {
                bad.push(format!("float N={n} p={p} q={q} gap={gap:e}"));
            }
        }
    }
    (
        bad.is_empty(),
        format!("28 cases; rational exact, float max |gap| {worst_float:.1e} (tol 1e-8); failures {bad:?}"),
    )
}

fn c3_two_particle_current() -> Outcome {
    let mut bad = Vec::new();
    for q in [rat(1, 2), rat(2, 1)] {
        for n in 1..=10i64 {
            let d = delta_exact_resummed(&rparams(n as usize, 2, &q)).unwrap();
            let one = rat(1, 1);
            let closed = rat(2 * n, 1) / (rat(n, 1) + (one.clone() - &q) / (one + &q));
            if d.current != closed {
                bad.push(format!("N={n} q={q}"));
            }
        }
    }
    (
        bad.is_empty(),
        format!("20 cases, exact equality; failures {bad:?}"),
    )
}

/// Value at `1/N = 0` of the quadratic through three points.
fn extrapolate(ns: &[f64; 3], vs: &[f64; 3]) -> f64 {
    let xs = ns.map(|n| 1.0 / n);
    let mut total = 0.0;
    for i in 0..3 {
        let mut basis = 1.0;
        for j in 0..3 {
            if j != i {
                basis *= (0.0 - xs[j]) / (xs[i] - xs[j]);
            }
        }
        total += vs[i] * basis;
    }
    total
}

fn c4_two_particle_limit() -> Outcome {
    let prec = Precision::new(256);
    let ns = [50.0, 100.0, 200.0];
    let mut ok = true;
    let mut detail = Vec::new();
    for (q, target) in [(0.5, 2.0 + 2.0 / 27.0), (0.0, 8.0 / 3.0)] {
        let vs = ns.map(|n| {
            delta_exact_resummed(&fparams(n as usize, 2, q, prec))
                .unwrap()
                .delta
                .to_f64()
        });
        let limit = extrapolate(&ns, &vs);
        let rel = (limit - target).abs() / target;
        ok &= rel <= 0.01;
        detail.push(format!("q={q}: {limit:.6} vs {target:.6} (rel {rel:.1e})"));
    }
    (ok, format!("{}; tol 1%", detail.join(", ")))
}

fn c5_free_particles() -> Outcome {
    let prec = Precision::new(256);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (n, p) in [(2, 2), (3, 2), (3, 3)] {
        let r = oracle(&rparams(n, p, &rat(1, 1)), DEFAULT_STATE_CAP).unwrap();
        ok &= r.current == rat(p as i64, 1) && r.delta == rat(p as i64, 1);
        let f = oracle(&fparams(n, p, 1.0, prec), DEFAULT_STATE_CAP).unwrap();
        let gap = (f.current.to_f64() - p as f64)
            .abs()
            .max((f.delta.to_f64() - p as f64).abs());
        worst = worst.max(gap);
        ok &= gap <= 1e-10;
    }
    (
        ok,
        format!("rational exact; float max |gap| {worst:.1e} (tol 1e-10)"),
    )
}

fn c6_kpz() -> Outcome {
    let prec = Precision::new(256);
    let s = saddle_data(1.0, 0.5, 1e-14).unwrap();
    let k = kpz_coefficient(&s);
    let devs: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let d = delta_exact_resummed(&fparams(n, n, 0.5, prec))
                .unwrap()
                .delta
                .to_f64();
            (d / (n as f64).powf(1.5) - k).abs() / k
        })
        .collect();
    let (phi1, phi2) = phi_derivatives(&s);
    let r2 = kpz_coefficient_phi_form(&s, phi1, phi2);
    let ok = strictly_decreasing(&devs) && devs[2] <= 0.15;
    (
        ok,
        format!(
            "K={k:.6}, rel dev N=16,32,64 {} (tol 15% at 64, decreasing); phi form {r2:.6} logged only",
            fmt_list(&devs)
        ),
    )
}

fn c7_crossover() -> Outcome {
    let prec = Precision::new(256);
    let ns = [16usize, 36, 64, 100];
    let mut ok = true;
    let mut detail = Vec::new();
    let mut predictions = Vec::new();
    for alpha in [1.0, -1.0] {
        let c = crossover_prediction(1.0, alpha, 1e-12).unwrap();
        predictions.push(c.prediction);
        let devs: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let q = crossover_q(alpha, n);
                let d = delta_exact_resummed(&fparams(n, n, q, prec))
                    .unwrap()
                    .delta
                    .to_f64();
                (d / n as f64 - c.prediction).abs() / c.prediction
            })
            .collect();
        ok &= strictly_decreasing(&devs) && devs[3] <= 0.10;
        detail.push(format!("alpha={alpha}: {}", fmt_list(&devs)));
    }
    ok &= predictions[0] == predictions[1];
    (
        ok,
        format!(
            "F(8)={:.6}, rel dev N=16,36,64,100 {} (tol 10% at 100, decreasing)",
            predictions[0],
            detail.join("; ")
        ),
    )
}

fn c8_crossover_limits() -> Outcome {
    let small = crossover_f(1e-6, 1e-10).unwrap();
    let large = crossover_f(1e6, 1e-8).unwrap() / 1e3;
    let target = std::f64::consts::PI.sqrt() / (8.0 * 2f64.sqrt());
    let ok = (small - 1.0).abs() <= 1e-3 && (large - target).abs() <= 1e-3;
    (
        ok,
        format!("F(1e-6)={small:.6} (1 +- 1e-3), F(1e6)/1e3={large:.6} ({target:.6} +- 1e-3)"),
    )
}

fn c9_fss_estimate() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for q in [rat(0, 1), rat(1, 2)] {
        let vals: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&n| {
                let pr = rparams(n, n, &q);
                let d = delta_exact_resummed(&pr).unwrap().delta;
                let e = delta_fss_estimate(&pr).unwrap();
                let nn = rat((n * n) as i64, 1);
                (rat(n as i64, 1) * (d / &nn - e / &nn)).abs().to_f64()
            })
            .collect();
        ok &= vals.windows(2).all(|w| w[1] <= w[0]) && vals.iter().all(|&v| v <= 1.0);
        detail.push(format!("q={q}: {}", fmt_list(&vals)));
    }
    (
        ok,
        format!(
            "N|Delta-est|/N^2 at N=8,16,32: {} (bound 1, non-increasing)",
            detail.join("; ")
        ),
    )
}

fn c10_tq() -> Outcome {
    let qs = [rat(-1, 2), rat(1, 3), rat(1, 2), rat(2, 1), rat(3, 1)];
    let mut bad = Vec::new();
    for q in &qs {
        for n in 1..=6 {
            for p in 1..=6 {
                let pr = rparams(n, p, q);
                let t = tq_first_order(&pr).unwrap();
                let c = verify_tq_first_order(&t, &pr).unwrap();
                let exact = c.residual.iter().all(|x| x.is_zero())
                    && c.lambda1 == c.current
                    && c.q1_at_one == rat(p as i64, 1);
                if !exact {
                    bad.push(format!("N={n} p={p} q={q}"));
                }
            }
        }
    }
    (
        bad.is_empty(),
        format!("180 cases, residual 0, lambda1=J, Q1(1)=p exactly; failures {bad:?}"),
    )
}

fn c11_monte_carlo() -> Outcome {
    let pr = rparams(8, 8, &rat(1, 2));
    let exact = delta_exact_resummed(&pr).unwrap();
    let (j, d) = (exact.current.to_f64(), exact.delta.to_f64());
    let cfg = SimConfig::new(8, 8, 0.5, 2000.0, 200, 20240601);
    let est = estimate_cumulants(&cfg).unwrap();
    let again = estimate_cumulants(&cfg).unwrap();
    let same = serde_json::to_string(&est).unwrap() == serde_json::to_string(&again).unwrap();
    let zj = (est.j_hat - j) / est.se_j;
    let zd = (est.delta_hat - d) / est.se_delta;
    let ok = zj.abs() <= 3.0 && zd.abs() <= 3.0 && same;
    (
        ok,
        format!(
            "J_hat={:.4}+-{:.4} (exact {j:.4}, z={zj:.2}), Delta_hat={:.3}+-{:.3} (exact {d:.3}, z={zd:.2}), tol 3 se; seed replay identical={same}",
            est.j_hat, est.se_j, est.delta_hat, est.se_delta
        ),
    )
}

fn c12_resummation() -> Outcome {
    let prec = Precision::new(256);
    let qs = [
        rat(-1, 2),
        rat(0, 1),
        rat(1, 3),
        rat(1, 2),
        rat(2, 1),
        rat(3, 1),
    ];
    let sizes = [(3, 2), (4, 3), (5, 5)];
    let mut ok = true;
    let mut literal_equal = Vec::new();
    let mut worst_float: f64 = 0.0;
    for q in &qs {
        for &(n, p) in &sizes {
            let pr = rparams(n, p, q);
            let res = delta_exact_resummed(&pr).unwrap();
            let tr = delta_exact_truncated(&pr, 200).unwrap();
            let Method::Truncated { tail_bound, .. } = &tr.method else {
                return (false, "truncated evaluation lost its method tag".into());
            };
            let gap = (res.delta.clone() - &tr.delta).abs();
            if gap.is_zero() {
                literal_equal.push(format!("q={q}"));
            }
            if *q == rat(0, 1) {
                ok &= gap.is_zero();
            } else {
                ok &= gap <= *tail_bound;
            }
            let fp = ModelParams::new(n, p, BigReal::from_rational(q, prec)).unwrap();
            let fr = delta_exact_resummed(&fp).unwrap();
            let ft = delta_exact_truncated(&fp, 200).unwrap();
            let rel = relative_gap(&fr.delta, &ft.delta);
            worst_float = worst_float.max(rel);
            ok &= rel <= 1e-12;
        }
    }
    literal_equal.dedup();
    (
        ok,
        format!(
            "rational: exact at q=0, |gap| <= tail bound otherwise (literal equality at {literal_equal:?}); float max rel {worst_float:.1e} (tol 1e-12)"
        ),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("closed-form one-particle anchors", c1_one_particle),
        ("oracle equivalence", c2_oracle_equivalence),
        ("two-particle current", c3_two_particle_current),
        ("two-particle infinite-lattice limit", c4_two_particle_limit),
        ("q=1 free particles", c5_free_particles),
        ("KPZ scaling", c6_kpz),
        ("EW-KPZ crossover", c7_crossover),
        ("crossover function limits", c8_crossover_limits),
        ("finite-size estimate", c9_fss_estimate),
        ("first-order T-Q identity", c10_tq),
        ("Monte Carlo consistency", c11_monte_carlo),
        ("resummed vs truncated", c12_resummation),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check();
        let verdict = if ok { "PASS" } else { "FAIL" };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict} {name}: {detail} [{:.1}s]",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
