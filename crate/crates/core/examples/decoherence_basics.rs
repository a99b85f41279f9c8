//! Two-time histories of a qubit: decoherence matrix, criteria and the
//! largest probability change under coarse-graining.

use consistent_histories::prelude::*;
use consistent_histories::linalg::c;

fn main() -> Result<()> {
    let psi = ComplexVector::from_vec(vec![c(0.8, 0.0), c(0.6, 0.0)]);
    let z = vec![Projector::diagonal(&[true, false]), Projector::diagonal(&[false, true])];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = ComplexVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]);
    let x_plus = Projector::onto(&plus)?;
    let x = vec![x_plus.clone(), x_plus.complement()];

    let set = HistorySet::from_chain(InitialState::Pure(psi), vec![z, x])?;
    let d = decoherence_matrix(&set);
    println!("probabilities: {:?}", d.probabilities());

    let report = evaluate(&d, &Criterion::ALL, CriterionParams::new(0.05))?;
    for outcome in &report.criteria {
        println!("{:<10} pass={} achieved={:.3e}", outcome.criterion.name(), outcome.pass, outcome.achieved_epsilon);
    }
    let mpv = mpv_exact(&d)?;
    println!("max probability violation {:.6} on {:?}", mpv.value, mpv.maximizer);
    Ok(())
}
