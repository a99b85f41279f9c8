//! Random history sets shared by the integration and acceptance tests.
#![allow(dead_code)]

use consistent_histories::generators::sample_gue;
use consistent_histories::histories::{HistorySet, InitialState};
use consistent_histories::linalg::{c, unitary_exp, ComplexMatrix, ComplexVector, DensityMatrix, Projector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_unitary(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    unitary_exp(&sample_gue(d, rng), scale)
}

pub fn random_state(d: usize, rng: &mut ChaCha8Rng) -> ComplexVector {
    let v = ComplexVector::from_fn(d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let n = v.norm();
    v / c(n, 0.0)
}

pub fn random_mixed(d: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let weights: Vec<f64> = (0..rank).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let states: Vec<ComplexVector> = (0..rank).map(|_| random_state(d, rng)).collect();
    DensityMatrix::mixture(&weights, &states).unwrap()
}

/// Splits the columns of `u` into `parts` non-empty groups and returns the
/// projectors onto their spans.
pub fn random_decomposition(u: &ComplexMatrix, parts: usize, rng: &mut ChaCha8Rng) -> Vec<Projector> {
    let d = u.nrows();
    let mut idx: Vec<usize> = (0..d).collect();
    idx.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); parts];
    for (k, &i) in idx.iter().enumerate() {
        groups[if k < parts { k } else { rng.random_range(0..parts) }].push(i);
    }
    groups
        .iter()
        .map(|g| {
            let mut m = ComplexMatrix::zeros(d, d);
            for &i in g {
                let col = u.column(i).into_owned();
                m += &col * col.adjoint();
            }
            Projector::new(m).unwrap()
        })
        .collect()
}

/// Chain of `steps` random decompositions with at most `max_histories` histories.
/// `rotation` scales the random unitaries relative to the standard basis.
pub fn random_chain_set(
    d: usize,
    steps: usize,
    max_histories: usize,
    rotation: f64,
    mixed: bool,
    rng: &mut ChaCha8Rng,
) -> HistorySet {
    let mut decomps = Vec::new();
    let mut count = 1;
    for _ in 0..steps {
        let max_parts = (max_histories / count).min(d);
        if max_parts < 2 {
            break;
        }
        let parts = rng.random_range(2..=max_parts);
        count *= parts;
        let u = random_unitary(d, rotation, rng);
        decomps.push(random_decomposition(&u, parts, rng));
    }
    let initial = if mixed {
        InitialState::Mixed(random_mixed(d, rng.random_range(2..=d), rng))
    } else {
        InitialState::Pure(random_state(d, rng))
    };
    HistorySet::from_chain(initial, decomps).unwrap()
}
