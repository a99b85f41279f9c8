use consistent_histories::generators::{
    appendix_d_set, perturbation_experiment, perturbed_decoherence, sample_gue, sample_rng, theorem6_witness,
    zeno_class_members, zeno_closed_form, zeno_set, AppendixDParams, HermitianPerturbation, PerturbBase,
    PerturbParams, ZenoParams, ZENO_EXPLICIT_MAX,
};
use consistent_histories::histories::decoherence_matrix;
use consistent_histories::linalg::{c, inner, ComplexVector};
use consistent_histories::mpv::{mpv_exact, SignClass};

#[test]
fn large_violation_family_entries_and_mpv() {
    for n in 2..=12 {
        for eps in [0.5 / (n as f64 - 1.0), 1.0 / (n as f64 - 1.0)] {
            let g = appendix_d_set(&AppendixDParams::new(n, eps).unwrap()).unwrap();
            let w: Vec<ComplexVector> = (0..n)
                .map(|i| {
                    let mut x = ComplexVector::zeros(2 * n);
                    x.rows_mut(0, n).copy_from(&g.u[i]);
                    x.rows_mut(n, n).copy_from(&g.v[i]);
                    x / c(2f64.sqrt(), 0.0)
                })
                .collect();
            for i in 0..n {
                for j in 0..n {
                    let kd = f64::from(u8::from(i == j));
                    assert!((inner(&w[i], &w[j]) - c(kd, 0.0)).norm() < 1e-12, "w not orthonormal at n={n}");
                }
            }

            // u-history states are u_i/√(2n), so D = ((1+ε)δ_ij − ε)/(2n).
            let d = decoherence_matrix(&g.set);
            let two_n = 2.0 * n as f64;
            for i in 0..n {
                for j in 0..n {
                    let kd = f64::from(u8::from(i == j));
                    assert!((d.get(i, j).re - ((1.0 + eps) * kd - eps) / two_n).abs() < 1e-12);
                    assert!((d.get(n + i, n + j).re - ((1.0 - eps) * kd + eps) / two_n).abs() < 1e-12);
                    assert!(d.get(i, n + j).norm() < 1e-14);
                }
            }
            if n <= 10 || eps < 0.9 / (n as f64 - 1.0) {
                let mpv = mpv_exact(&d).unwrap();
                assert!((mpv.value - (n as f64 - 1.0) * eps / 2.0).abs() < 1e-10, "n={n} eps={eps}");
            }
        }
    }
}

#[test]
fn large_violation_rejects_epsilon_beyond_limit() {
    assert!(AppendixDParams::new(5, 0.3).is_err());
    assert!(AppendixDParams::new(1, 0.1).is_err());
    assert!(AppendixDParams::new(5, 0.0).is_err());
}

/// Amplitude of `P^n_{α_n} ⋯ P^1_{α_1}(1, 0)` along `u^n_{α_n}`, by explicit 2×2 products.
fn zeno_oracle_amplitude(n: usize, eps: f64, signs: &[bool]) -> f64 {
    let mut state = [1.0, 0.0];
    let mut basis = [1.0, 0.0];
    for (k, &minus) in signs.iter().enumerate() {
        let t = (k + 1) as f64 * eps;
        basis = if minus { [-t.sin(), t.cos()] } else { [t.cos(), t.sin()] };
        let overlap = basis[0] * state[0] + basis[1] * state[1];
        state = [overlap * basis[0], overlap * basis[1]];
    }
    assert_eq!(signs.len(), n);
    basis[0] * state[0] + basis[1] * state[1]
}

#[test]
fn zeno_matrix_matches_product_oracle() {
    for n in 1..=8 {
        let eps = 0.4;
        let d = decoherence_matrix(&zeno_set(&ZenoParams::new(n, eps).unwrap()).unwrap());
        let signs = |h: usize| (0..n).map(|k| h >> (n - 1 - k) & 1 == 1).collect::<Vec<_>>();
        let amp: Vec<f64> = (0..1 << n).map(|h| zeno_oracle_amplitude(n, eps, &signs(h))).collect();
        for a in 0..1 << n {
            for b in 0..1 << n {
                // Histories ending in different final projectors are orthogonal.
                let same_end = (a & 1) == (b & 1);
                let expected = if same_end { amp[a] * amp[b] } else { 0.0 };
                assert!((d.get(a, b).re - expected).abs() < 1e-14, "n={n} ({a},{b})");
            }
        }
    }
}

#[test]
fn zeno_off_diagonal_bound_and_grouping() {
    for n in [4usize, 12, 50, 400] {
        for theta in [0.5, 2.0, 3.0] {
            let z = zeno_closed_form(&ZenoParams::from_theta(n, theta).unwrap());
            let eps = theta / n as f64;
            assert!(z.max_off_diagonal <= eps * eps * (1.0 + 1e-12));
            let multiplicities: f64 = z.classes.iter().map(|k| k.multiplicity).sum();
            assert!((multiplicities / 2f64.powi(n as i32) - 1.0).abs() < 1e-9);
        }
    }
    let p = ZenoParams::new(12, 0.2).unwrap();
    let z = zeno_closed_form(&p);
    let d = decoherence_matrix(&zeno_set(&p).unwrap());
    let x = d.subset_violation(&zeno_class_members(12, SignClass::X));
    let y = d.subset_violation(&zeno_class_members(12, SignClass::Y));
    assert!((x - z.x_violation).abs() < 1e-12 && (y - z.y_violation).abs() < 1e-12);
    assert!(zeno_set(&ZenoParams::new(ZENO_EXPLICIT_MAX + 1, 0.1).unwrap()).is_err());
}

#[test]
fn witness_is_reproducible_from_closed_form() {
    for (off, viol) in [(1e-3, 10.0), (1e-2, 2.0), (1e-4, 50.0)] {
        let w = theorem6_witness(off, viol).unwrap();
        let z = zeno_closed_form(&ZenoParams::from_theta(w.n, w.theta).unwrap());
        assert!(z.max_off_diagonal <= off);
        let best = z.x_violation.abs().max(z.y_violation.abs());
        assert!(best > viol && (best - w.violation).abs() < 1e-9);
        assert!(w.theta.cosh().powi(2) > 2.0 * (viol + 1.0));
    }
}

#[test]
fn unperturbed_projector_decoheres_exactly() {
    let base = PerturbBase::new(8, 3);
    let a = HermitianPerturbation::new(sample_gue(8, &mut sample_rng(3, 0)));
    let d = perturbed_decoherence(&base, &a, 0.0);
    // Index 4α + 2x + y; y ≠ x kills the history when P' = P.
    for alpha in 0..2 {
        for x in 0..2 {
            let dead = 4 * alpha + 2 * x + (1 - x);
            assert!(d.get(dead, dead).norm() < 1e-28);
        }
    }
    let perturbed = perturbed_decoherence(&base, &a, 0.05);
    assert!((perturbed.total().re - base_norm(&base)).abs() < 1e-12);
}

fn base_norm(base: &PerturbBase) -> f64 {
    base.states.iter().map(|s| s.norm_squared()).sum::<f64>()
        + 2.0 * inner(&base.states[0], &base.states[1]).re
}

#[test]
fn perturbation_experiment_is_seed_deterministic() {
    let p = PerturbParams { d: 8, rank_p: 4, samples: 40, epsilon: 1e-2, seed: 11 };
    let a = perturbation_experiment(&p).unwrap();
    let b = perturbation_experiment(&p).unwrap();
    assert_eq!(a.term1_mean.to_bits(), b.term1_mean.to_bits());
    assert_eq!(a.slope.to_bits(), b.slope.to_bits());
    assert!((a.slope - 1.0).abs() < 0.15);
    assert!(perturbation_experiment(&PerturbParams { rank_p: 1, ..p }).is_err());
}
