//! Gillespie simulation of the ring, compared to the exact cumulants.

use num_rational::BigRational;
use qboson::cumulants::delta_exact_resummed;
use qboson::numerics::Scalar;
use qboson::simulator::{estimate_cumulants, SimConfig};
use qboson::stationary::ModelParams;

fn main() -> anyhow::Result<()> {
    let (n, p) = (6, 6);
    let exact = delta_exact_resummed(&ModelParams::new(
        n,
        p,
        BigRational::new(1.into(), 2.into()),
    )?)?;
    let cfg = SimConfig::new(n, p, 0.5, 500.0, 64, 7);
    let est = estimate_cumulants(&cfg)?;
    println!(
        "J:     {:.4} +- {:.4} (exact {:.4})",
        est.j_hat,
        est.se_j,
        exact.current.to_f64()
    );
    println!(
        "Delta: {:.3} +- {:.3} (exact {:.3})",
        est.delta_hat,
        est.se_delta,
        exact.delta.to_f64()
    );
    println!(
        "batch-means Delta {:.3}, {} events",
        est.delta_batch_means, est.total_events
    );
    Ok(())
}
