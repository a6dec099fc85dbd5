//! Weak-asymmetry scaling `q = exp(-alpha / sqrt N)`: exact `Delta / N`
//! against the crossover prediction for both signs of `alpha`.

use qboson::asymptotics::{crossover_f, crossover_prediction, crossover_q};
use qboson::cumulants::delta_exact_resummed;
use qboson::numerics::{BigReal, Precision};
use qboson::stationary::ModelParams;

fn main() -> anyhow::Result<()> {
    for g in [0.01, 1.0, 8.0, 100.0] {
        println!("F({g}) = {:.8}", crossover_f(g, 1e-12)?);
    }
    let prec = Precision::new(256);
    for alpha in [1.0, -1.0] {
        let c = crossover_prediction(1.0, alpha, 1e-12)?;
        println!("alpha={alpha}: prediction {:.6}", c.prediction);
        for n in [16usize, 36, 64] {
            let q = BigReal::from_f64(crossover_q(alpha, n), prec).unwrap();
            let d = delta_exact_resummed(&ModelParams::new(n, n, q)?)?
                .delta
                .to_f64();
            println!("  N={n:>3}: Delta/N = {:.6}", d / n as f64);
        }
    }
    Ok(())
}
