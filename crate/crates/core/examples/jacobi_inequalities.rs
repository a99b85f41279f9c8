//! Grid verification of the normalised Jacobi polynomial inequalities
//! behind the packing bounds.

use consistent_histories::packing::jacobi::{verify_sonine_polya, verify_theorem3, verify_theorem4, Theorem};

fn main() -> consistent_histories::Result<()> {
    let t3 = verify_theorem3(&Theorem::RealSphere.default_alphas(), 30, 1000)?;
    println!("beta = -1/2: {} checks, {} violations", t3.checks, t3.violations());
    let t4 = verify_theorem4(&Theorem::ComplexSphere.default_alphas(), 30, 1000)?;
    println!("beta = 0:    {} checks, {} violations", t4.checks, t4.violations());
    for n in 1..=5 {
        let r = verify_sonine_polya(2.0, n, 2000)?;
        println!("Sonine-Polya alpha = 2, n = {n}: holds = {}", r.holds());
    }
    Ok(())
}
