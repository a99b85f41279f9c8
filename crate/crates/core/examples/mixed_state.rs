//! A mixed initial state is purified before decoherence-matrix entries are
//! formed; the result agrees with the trace formula.

use consistent_histories::histories::decoherence_matrix_trace;
use consistent_histories::linalg::c;
use consistent_histories::prelude::*;

fn main() -> Result<()> {
    let e = |k: usize| ComplexVector::from_fn(3, |i, _| c(f64::from(u8::from(i == k)), 0.0));
    let mixed = DensityMatrix::mixture(&[0.5, 0.3, 0.2], &[e(0), e(1), e(2)])?;
    let s = 0.5f64.sqrt();
    let tilted = ComplexVector::from_vec(vec![c(s, 0.0), c(0.0, s), c(0.0, 0.0)]);
    let p = Projector::onto(&tilted)?;
    let first = vec![Projector::diagonal(&[true, false, false]), Projector::diagonal(&[false, true, true])];
    let set = HistorySet::from_chain(InitialState::Mixed(mixed), vec![first, vec![p.clone(), p.complement()]])?;

    let via_states = decoherence_matrix(&set);
    let via_trace = decoherence_matrix_trace(&set);
    println!("state dimension after purification: {}", set.state_dim());
    let diff = (via_states.entries() - via_trace.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    println!("max |difference| between the two evaluations: {diff:.2e}");
    println!("mpv = {:.6}", mpv_exact(&via_states)?.value);
    Ok(())
}
