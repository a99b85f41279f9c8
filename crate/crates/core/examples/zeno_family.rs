//! Zeno family: as the number of steps grows at fixed total rotation θ,
//! every off-diagonal entry vanishes while the grouped violations approach
//! finite limits.

use consistent_histories::generators::{zeno_asymptotics, zeno_class_members};
use consistent_histories::mpv::SignClass;
use consistent_histories::prelude::*;

fn main() -> Result<()> {
    let theta = 2.0;
    println!("{:>6} {:>12} {:>12} {:>12}", "n", "max |D_ab|", "X", "Y");
    for n in [10usize, 40, 160, 640, 2560] {
        let z = zeno_closed_form(&ZenoParams::from_theta(n, theta)?);
        println!("{n:>6} {:>12.4e} {:>12.6} {:>12.6}", z.max_off_diagonal, z.x_violation, z.y_violation);
    }
    let (x_limit, y_limit) = zeno_asymptotics(theta);
    println!("limits: X = {x_limit:.6}, Y = {y_limit:.6}");

    // The explicit 2^n matrix agrees with the grouped closed form.
    let p = ZenoParams::from_theta(10, theta)?;
    let d = decoherence_matrix(&zeno_set(&p)?);
    let x = d.subset_violation(&zeno_class_members(10, SignClass::X));
    println!("n = 10 explicit X = {x:.12}, closed form = {:.12}", zeno_closed_form(&p).x_violation);
    Ok(())
}
