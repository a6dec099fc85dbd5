//! Saddle-point data at density one and the approach of `Delta / N^{3/2}`
//! to its KPZ limit along `p = N`.

use qboson::asymptotics::{current_asymp, kpz_coefficient, saddle_data};
use qboson::cumulants::delta_exact_resummed;
use qboson::numerics::{BigReal, Precision};
use qboson::stationary::ModelParams;

fn main() -> anyhow::Result<()> {
    let q = 0.5;
    let saddle = saddle_data(1.0, q, 1e-14)?;
    let k = kpz_coefficient(&saddle);
    println!(
        "z* = {:.12}, j_inf = {:.12}, K = {k:.10}",
        saddle.zstar, saddle.j_inf
    );
    let prec = Precision::new(256);
    for n in [8usize, 16, 32, 64] {
        let params = ModelParams::new(n, n, BigReal::from_f64(q, prec).unwrap())?;
        let exact = delta_exact_resummed(&params)?;
        let ratio = exact.delta.to_f64() / (n as f64).powf(1.5);
        println!(
            "N={n:>3}: Delta/N^1.5 = {ratio:.6} (dev {:.4}), J/N = {:.8}, asymptotic {:.8}",
            (ratio - k).abs() / k,
            exact.current.to_f64() / n as f64,
            current_asymp(n, &saddle)
        );
    }
    Ok(())
}
