//! First order of the T-Q relation: the explicit polynomials and the check
//! that the identity holds coefficient by coefficient.

use num_rational::BigRational;
use qboson::stationary::ModelParams;
use qboson::tq::{tq_first_order, verify_tq_first_order};

fn main() -> anyhow::Result<()> {
    let q = BigRational::new(2.into(), 1.into());
    let params = ModelParams::new(4, 3, q)?;
    let tq = tq_first_order(&params)?;
    let show = |v: &[BigRational]| {
        v.iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    println!("Q1 = [{}]", show(&tq.q1));
    println!("T1 = [{}]", show(&tq.t1));
    let check = verify_tq_first_order(&tq, &params)?;
    println!("residual = [{}]", show(&check.residual));
    println!(
        "Q1(1) = {}, lambda1 = {}, J = {}",
        check.q1_at_one, check.lambda1, check.current
    );
    println!("passed: {}", check.passed);
    Ok(())
}
