//! Packing bounds for nearly orthogonal vectors in C^d, with the degree-one
//! linear-programming certificate.

use consistent_histories::packing::{bound_table, lp_optimality_check, shannon_crossover};
use consistent_histories::prelude::*;

fn main() -> Result<()> {
    let ds: Vec<usize> = vec![3, 5, 10, 20, 50];
    for &d in &ds {
        let eps = 1.0 / (2.0 * d as f64);
        for row in bound_table(&[d], &[eps], &[Overlap::RePart, Overlap::Modulus])? {
            println!(
                "{:<8} d={:<3} eps={:.4} lower={:>10.3} upper={:>6} valid={}",
                row.space,
                row.d,
                row.epsilon,
                row.lower,
                row.upper.map_or("inf".into(), |u| u.to_string()),
                row.valid
            );
        }
        let lp = lp_optimality_check(d, eps, Overlap::RePart, 10, 400)?;
        println!("         certificate feasible={} objective={:.4}", lp.feasible, lp.objective);
    }
    for d in [10usize, 1000, 100000] {
        let (exact, approx) = shannon_crossover(d);
        println!("d = {d:>6}: lower bound exceeds 2d beyond eps = {exact:.6} (expansion {approx:.6})");
    }
    Ok(())
}
