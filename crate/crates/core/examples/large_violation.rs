//! The 2n-history family that satisfies the medium DHC at ε yet has a
//! coarse-graining that moves probability by (n−1)ε/2.

use consistent_histories::prelude::*;

fn main() -> Result<()> {
    println!("{:>3} {:>8} {:>12} {:>12} {:>12}", "n", "eps", "mpv", "(n-1)eps/2", "medium-dhc");
    for n in [2usize, 4, 6, 8, 10, 11] {
        let eps = 0.1;
        let g = appendix_d_set(&AppendixDParams::new(n, eps)?)?;
        let d = decoherence_matrix(&g.set);
        let mpv = mpv_exact(&d)?;
        let achieved = medium_dhc(&d, eps, NullPolicy::Skip)?.achieved_epsilon;
        println!("{n:>3} {eps:>8.4} {:>12.8} {:>12.8} {achieved:>12.8}", mpv.value, g.expected_mpv);
    }
    Ok(())
}
