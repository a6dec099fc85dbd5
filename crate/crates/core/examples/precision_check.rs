//! Float evaluation guarded by a rerun at doubled precision.

use qboson::cumulants::delta_exact_resummed;
use qboson::numerics::{verify_precision, BigReal, Precision};
use qboson::stationary::ModelParams;

fn main() -> anyhow::Result<()> {
    let result = verify_precision(Precision::new(128), 1e-25, |prec| {
        let q = BigReal::from_ratio(9, 10, prec);
        delta_exact_resummed(&ModelParams::new(40, 40, q)?)
    })?;
    println!("Delta(40, 40, 0.9) = {}", result.delta.to_decimal(30));
    println!("J = {}", result.current.to_decimal(30));
    Ok(())
}
