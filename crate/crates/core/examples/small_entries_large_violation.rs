//! Off-diagonal smallness alone does not bound probability violations:
//! find Zeno sets with every |D_αβ| below a threshold and violation above a target.

use consistent_histories::prelude::*;

fn main() -> Result<()> {
    for (off, violation) in [(1e-2, 1.0), (1e-3, 10.0), (1e-4, 100.0)] {
        let w = theorem6_witness(off, violation)?;
        println!(
            "|D| <= {off:.0e}, violation > {violation:>5}: theta = {}, n = {:>6}, max |D| = {:.3e}, violation = {:.3} ({:?})",
            w.theta, w.n, w.max_off_diagonal, w.violation, w.class
        );
    }
    Ok(())
}
