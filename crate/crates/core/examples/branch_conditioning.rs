//! Conditioning on a realised past: the DHC for the future histories on the
//! current density matrix, compared with the joint branch operators.

use consistent_histories::consistency::joint_branch_dhc;
use consistent_histories::histories::ClassOperator;
use consistent_histories::linalg::c;
use consistent_histories::prelude::*;

fn main() -> Result<()> {
    let psi = ComplexVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.0), c(0.8, 0.0), c(0.0, 0.0)]);
    let past = Projector::diagonal(&[true, true, false, false]);
    let set = HistorySet::from_chain(InitialState::Pure(psi), vec![vec![past.clone(), past.complement()]])?;

    let s = 0.5f64.sqrt();
    let v = ComplexVector::from_vec(vec![c(s, 0.0), c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let f = Projector::onto(&v)?;
    let futures = vec![ClassOperator::raw(f.matrix().clone()), ClassOperator::raw(f.complement().matrix().clone())];
    let past_op = ClassOperator::raw(past.matrix().clone());

    let conditional = conditional_dhc(&set, &past_op, &futures, 0.1)?;
    let joint = joint_branch_dhc(&set, &past_op, &futures, 0.1)?;
    println!("conditional: pass={} achieved={:.3e}", conditional.pass, conditional.achieved_epsilon);
    println!("joint:       pass={} achieved={:.3e}", joint.pass, joint.achieved_epsilon);
    Ok(())
}
