//! Builds the tilted generator on the full configuration space and recovers
//! `J` and `Delta` by perturbation theory and, independently, by finite
//! differences of the top eigenvalue.

use num_rational::BigRational;
use qboson::cumulants::delta_exact_resummed;
use qboson::numerics::Precision;
use qboson::oracle::{build_generator, lambda_fd_cumulants, oracle, DEFAULT_STATE_CAP};
use qboson::stationary::ModelParams;

fn main() -> anyhow::Result<()> {
    let q = BigRational::new(1.into(), 3.into());
    let params = ModelParams::new(4, 3, q)?;
    let reference = oracle(&params, DEFAULT_STATE_CAP)?;
    let formula = delta_exact_resummed(&params)?;
    println!("states: {}", reference.states);
    println!(
        "oracle  J = {}, Delta = {}",
        reference.current, reference.delta
    );
    println!("formula J = {}, Delta = {}", formula.current, formula.delta);
    println!("product-form gap: {:e}", reference.product_form_gap);

    let gen = build_generator(&params, DEFAULT_STATE_CAP)?;
    let (l1, l2) = lambda_fd_cumulants(&gen, 1e-3, Precision::new(192))?;
    println!("finite differences: lambda'(0) = {l1:.10}, lambda''(0) = {l2:.10}");
    Ok(())
}
