//! Acceptance checks. Each prints one PASS/FAIL line with the measured
//! quantity, its tolerance and the elapsed time; the process fails if any
//! check fails.

mod common;

use std::time::{Duration, Instant};

use consistent_histories::consistency::{dhc, medium_dhc, NullPolicy};
use consistent_histories::generators::{
    appendix_d_set, perturbation_experiment, random_near_consistent_set, theorem6_witness, zeno_class_members,
    zeno_closed_form, zeno_entry, zeno_set, AppendixDParams, PerturbParams, ZenoParams,
};
use consistent_histories::histories::{
    coarse_grain, decoherence_matrix, decoherence_matrix_trace, history_states, CoarseGraining, HistorySet,
};
use consistent_histories::linalg::{hermitian_deviation, real_embed};
use consistent_histories::mpv::{mpv_exact, SignClass};
use consistent_histories::packing::jacobi::{verify_sonine_polya, verify_theorem3, verify_theorem4, Theorem};
use consistent_histories::packing::{shannon_lower_bound, upper_bound, BoundQuery, Overlap};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn large_violation_exactness() -> Outcome {
    let mut worst_mpv: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for &(n, eps) in &[(3, 0.1), (4, 0.1), (6, 0.05)] {
        let g = appendix_d_set(&AppendixDParams::new(n, eps).unwrap()).unwrap();
        let d = decoherence_matrix(&g.set);
        let mpv = mpv_exact(&d).unwrap();
        worst_mpv = worst_mpv.max((mpv.value - (n as f64 - 1.0) * eps / 2.0).abs());
        let ratio = medium_dhc(&d, eps, NullPolicy::Skip).unwrap().achieved_epsilon;
        worst_ratio = worst_ratio.max((ratio - eps).abs());
    }
    check(
        worst_mpv <= 1e-10 && worst_ratio <= 1e-10,
        format!("max |mpv - (n-1)eps/2| = {worst_mpv:.2e}, max |medium-dhc - eps| = {worst_ratio:.2e} (tol 1e-10)"),
    )
}

fn zeno_closed_form_agreement() -> Outcome {
    let mut entry_err: f64 = 0.0;
    let mut class_err: f64 = 0.0;
    for n in 1..=10 {
        for &eps in &[0.1, 0.3, 0.7] {
            let p = ZenoParams::new(n, eps).unwrap();
            let d = decoherence_matrix(&zeno_set(&p).unwrap());
            for a in 0..d.n() {
                for b in 0..d.n() {
                    let z = d.get(a, b);
                    entry_err = entry_err.max((z.re - zeno_entry(n, eps, a, b)).abs()).max(z.im.abs());
                }
            }
            let z = zeno_closed_form(&p);
            let x = d.subset_violation(&zeno_class_members(n, SignClass::X));
            let y = d.subset_violation(&zeno_class_members(n, SignClass::Y));
            class_err = class_err.max((x - z.x_violation).abs()).max((y - z.y_violation).abs());
        }
    }
    check(
        entry_err <= 1e-12 && class_err <= 1e-12,
        format!("entry error {entry_err:.2e}, X/Y grouped vs subset sums {class_err:.2e} (tol 1e-12)"),
    )
}

fn zeno_asymptotics() -> Outcome {
    let r = |n| zeno_closed_form(&ZenoParams::from_theta(n, 2.0).unwrap()).x_residual;
    let (r200, r400) = (r(200), r(400));
    check(
        r400 < 0.6 * r200,
        format!("X residual n=200: {r200:.4e}, n=400: {r400:.4e}, ratio {:.3} (< 0.6)", r400 / r200),
    )
}

fn small_entries_witness() -> Outcome {
    let w = theorem6_witness(1e-3, 10.0).unwrap();
    let z = zeno_closed_form(&ZenoParams::from_theta(w.n, w.theta).unwrap());
    let violation = z.x_violation.abs().max(z.y_violation.abs());
    check(
        z.max_off_diagonal <= 1e-3 && violation > 10.0,
        format!(
            "theta = {}, n = {}: max off-diagonal {:.3e} (<= 1e-3), mpv {:.3} (> 10)",
            w.theta, w.n, z.max_off_diagonal, violation
        ),
    )
}

fn main_result() -> Outcome {
    let mut sets: Vec<HistorySet> = Vec::new();
    let mut rng = common::rng(2024);
    for i in 0..150u64 {
        let d = rng.random_range(2..=8usize);
        let n = rng.random_range(2..=(2 * d).min(12));
        let noise = [0.0, 1e-5, 1e-4, 1e-3, 1e-2][i as usize % 5];
        sets.push(random_near_consistent_set(d, n, noise, 1000 + i).unwrap());
    }
    for &(n, d) in &[(2usize, 4usize), (3, 6), (4, 8)] {
        for &delta in &[0.05, 0.2, 0.5] {
            let eps = delta / (2.0 * d as f64);
            sets.push(appendix_d_set(&AppendixDParams::new(n, eps).unwrap()).unwrap().set);
        }
    }
    for n in 1..=3 {
        for &eps in &[1e-4, 1e-3, 0.01, 0.1] {
            sets.push(zeno_set(&ZenoParams::new(n, eps).unwrap()).unwrap());
        }
    }
    for i in 0..40 {
        let d = rng.random_range(2..=4);
        let rotation = [1e-5, 1e-3, 0.1, 1.0][i % 4];
        sets.push(common::random_chain_set(d, 3, 12, rotation, i % 3 == 0, &mut rng));
    }

    let mut passing = 0;
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for set in &sets {
        let d = decoherence_matrix(set);
        let dim = set.state_dim() as f64;
        let mpv = mpv_exact(&d).unwrap().value;
        for &delta in &[0.05, 0.2, 0.5] {
            if dhc(&d, delta / (2.0 * dim), NullPolicy::Skip).unwrap().pass {
                passing += 1;
                let limit = delta * (1.0 + delta);
                worst_ratio = worst_ratio.max(mpv / limit);
                if mpv > limit {
                    violations += 1;
                }
            }
        }
    }
    check(
        sets.len() >= 200 && violations == 0 && passing > 0,
        format!(
            "{} sets, {passing} (set, delta) passes at eps = delta/(2d), {violations} with mpv > delta(1+delta), max mpv/limit {worst_ratio:.3}",
            sets.len()
        ),
    )
}

fn kissing_bounds() -> Outcome {
    let mut bad = Vec::new();
    for d in 3..=50usize {
        let two_d = 2.0 * d as f64;
        for (eps, expect) in [(0.9 / two_d, 2 * d as u64), (1.0 / two_d, 2 * d as u64 + 1)] {
            let q = BoundQuery::complex(d, Overlap::RePart, eps).unwrap();
            let up = upper_bound(&q).unwrap();
            if up.value != Some(expect) {
                bad.push(format!("d={d} eps={eps}: {:?}", up.value));
            }
            if up.valid && shannon_lower_bound(&q) > up.value.unwrap() as f64 {
                bad.push(format!("d={d} eps={eps}: lower bound exceeds upper"));
            }
        }
    }
    let detail = match bad.first() {
        None => "d in 3..=50: upper = 2d at 0.9/(2d), 2d+1 at 1/(2d), lower <= upper (exact integers)".to_string(),
        Some(first) => format!("{} mismatches, first {first}", bad.len()),
    };
    check(bad.is_empty(), detail)
}

fn jacobi() -> Outcome {
    let t3 = verify_theorem3(&Theorem::RealSphere.default_alphas(), 40, 2000).unwrap();
    let t4 = verify_theorem4(&Theorem::ComplexSphere.default_alphas(), 40, 2000).unwrap();
    let mut sonine_failures = 0;
    for alpha in [1.0, 2.0, 3.0] {
        for n in 1..=10 {
            if !verify_sonine_polya(alpha, n, 4000).unwrap().holds() {
                sonine_failures += 1;
            }
        }
    }
    check(
        t3.violations() == 0 && t4.violations() == 0 && sonine_failures == 0,
        format!(
            "beta = -1/2: {} violations / {} checks, beta = 0: {} / {}, Sonine-Polya failures {sonine_failures}",
            t3.violations(),
            t3.checks,
            t4.violations(),
            t4.checks
        ),
    )
}

fn perturbation() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for rank in [4usize, 8, 16, 32] {
        let r = perturbation_experiment(&PerturbParams {
            d: 2 * rank,
            rank_p: rank,
            samples: 500,
            epsilon: 1e-2,
            seed: 7,
        })
        .unwrap();
        let ok = |m: f64| m >= 0.5 * r.expected && m <= 2.0 * r.expected;
        let slope_ok = (r.slope - 1.0).abs() <= 0.15;
        pass &= ok(r.term1_mean) && ok(r.term2_mean) && slope_ok && r.samples_used > 0;
        parts.push(format!(
            "r={rank}: {:.3}/{:.3} vs {:.3}, slope {:.3}",
            r.term1_mean, r.term2_mean, r.expected, r.slope
        ));
    }
    check(pass, parts.join("; "))
}

fn structural_invariants() -> Outcome {
    let mut rng = common::rng(99);
    let (mut herm, mut sum, mut pur, mut emb, mut cg): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..100 {
        let d = rng.random_range(2..=4);
        let set = common::random_chain_set(d, 3, 16, 1.0, i % 2 == 0, &mut rng);
        let dm = decoherence_matrix(&set);
        herm = herm.max(hermitian_deviation(dm.entries()));
        sum = sum.max((dm.total() - 1.0).norm());
        let trace_form = decoherence_matrix_trace(&set);
        pur = pur.max((dm.entries() - trace_form.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max));
        let states = history_states(&set);
        for a in 0..states.len() {
            for b in 0..states.len() {
                let re = real_embed(&states[a]).dot(&real_embed(&states[b]));
                emb = emb.max((re - dm.get(a, b).re).abs());
            }
        }
        let n = dm.n();
        let mut idx: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
        let k = rng.random_range(1..=n);
        let cells = vec![idx[..k].to_vec(), idx[k..].to_vec()];
        let coarse = coarse_grain(&dm, &CoarseGraining::new(cells, n).unwrap()).unwrap();
        cg = cg.max((coarse.total() - dm.total()).norm());
    }
    check(
        herm <= 1e-14 && sum <= 1e-12 && pur <= 1e-12 && emb <= 1e-14 && cg <= 1e-12,
        format!(
            "hermiticity {herm:.1e} (1e-14), unit sum {sum:.1e} (1e-12), purification {pur:.1e} (1e-12), embedding {emb:.1e} (1e-14), coarse-graining {cg:.1e} (1e-12)"
        ),
    )
}

type Check = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let checks: [Check; 9] = [
        ("large-violation family exactness", Duration::from_secs(1), large_violation_exactness),
        ("Zeno closed form", Duration::from_secs(5), zeno_closed_form_agreement),
        ("Zeno asymptotics", Duration::from_secs(1), zeno_asymptotics),
        ("small off-diagonals with large violation", Duration::from_secs(1), small_entries_witness),
        ("DHC implies bounded violation", Duration::from_secs(60), main_result),
        ("kissing bounds", Duration::from_secs(1), kissing_bounds),
        ("Jacobi inequalities", Duration::from_secs(30), jacobi),
        ("perturbation experiment", Duration::from_secs(60), perturbation),
        ("structural invariants", Duration::from_secs(30), structural_invariants),
    ];
    let mut failures = 0;
    for (i, (name, budget, f)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let pass = outcome.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "acceptance {}: {} {name}: {}; {:.2} s (budget {} s{})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    if failures > 0 {
        eprintln!("{failures} acceptance check(s) failed");
        std::process::exit(1);
    }
}
