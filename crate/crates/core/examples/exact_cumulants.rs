//! Exact current and diffusion coefficient on a small ring, in rational
//! arithmetic, with the resummed and truncated kernels side by side.

use num_rational::BigRational;
use qboson::cumulants::{delta_exact_resummed, delta_exact_truncated, Method};
use qboson::stationary::ModelParams;

fn main() -> anyhow::Result<()> {
    let q = BigRational::new(1.into(), 2.into());
    for (n, p) in [(2, 2), (4, 3), (6, 6)] {
        let params = ModelParams::new(n, p, q.clone())?;
        let exact = delta_exact_resummed(&params)?;
        println!(
            "N={n} p={p} q={q}: J = {}, Delta = {}",
            exact.current, exact.delta
        );
        let cut = delta_exact_truncated(&params, 30)?;
        if let Method::Truncated { tail_bound, .. } = &cut.method {
            let gap = exact.delta.clone() - &cut.delta;
            println!(
                "  truncated at i_max=30: gap {:.3e}, tail bound {:.3e}",
                to_f64(&gap),
                to_f64(tail_bound)
            );
        }
    }
    Ok(())
}

fn to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}
