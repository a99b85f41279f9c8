//! Families of history sets with known structure: the large-violation
//! family, the Zeno family, perturbed-projector experiments and random
//! near-consistent sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::histories::{ClassOperator, DecoherenceMatrix, HistorySet, InitialState};
use crate::linalg::{c, inner, outer, ComplexMatrix, ComplexVector, Projector, C64};
use crate::mpv::SignClass;

/// Largest step count for which [`zeno_set`] enumerates all `2^n` histories.
pub const ZENO_EXPLICIT_MAX: usize = 14;

// ---------------------------------------------------------------------------
// Large-violation family

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixDParams {
    pub n: usize,
    pub epsilon: f64,
}

impl AppendixDParams {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::out_of_range("n", n as f64, "n >= 2"));
        }
        let limit = 1.0 / (n as f64 - 1.0);
        if !(epsilon > 0.0 && epsilon <= limit * (1.0 + 1e-12)) {
            return Err(Error::out_of_range("epsilon", epsilon, format!("0 < epsilon <= 1/(n-1) = {limit}")));
        }
        Ok(AppendixDParams { n, epsilon })
    }
}

#[derive(Debug, Clone)]
pub struct AppendixDSet {
    pub set: HistorySet,
    pub expected_mpv: f64,
    pub u: Vec<ComplexVector>,
    pub v: Vec<ComplexVector>,
}

/// `2n` histories whose states are `u_i/√(2n)` in one half of the space and
/// `v_i/√(2n)` in the other, with `u_i†u_j = (1+ε)δ_ij − ε` and
/// `v_i†v_j = (1−ε)δ_ij + ε`. Collecting all `u` histories changes the
/// probability by `(n−1)ε/2`.
pub fn appendix_d_set(p: &AppendixDParams) -> Result<AppendixDSet> {
    let n = p.n;
    let nf = n as f64;
    let eps = p.epsilon;
    // Clamp radicands that round slightly negative on the boundary.
    let a = (1.0 + eps + ((1.0 + eps) * (1.0 + eps - nf * eps)).max(0.0).sqrt()) / eps;
    let b = (1.0 - eps + ((1.0 - eps) * (1.0 - eps + nf * eps)).max(0.0).sqrt()) / eps;
    let ua = (a * a - 2.0 * a + nf).sqrt();
    let vb = (b * b + 2.0 * b + nf).sqrt();
    let basis = |i: usize, scale: f64, shift: f64, norm: f64| {
        ComplexVector::from_fn(n, |j, _| {
            let delta = if i == j { 1.0 } else { 0.0 };
            c((scale * delta + shift) / norm, 0.0)
        })
    };
    let u: Vec<_> = (0..n).map(|i| basis(i, a, -1.0, ua)).collect();
    let v: Vec<_> = (0..n).map(|i| basis(i, b, 1.0, vb)).collect();

    for i in 0..n {
        for j in 0..n {
            let kd = if i == j { 1.0 } else { 0.0 };
            let uu = inner(&u[i], &u[j]).re;
            let vv = inner(&v[i], &v[j]).re;
            if (uu - ((1.0 + eps) * kd - eps)).abs() > 1e-10 || (vv - ((1.0 - eps) * kd + eps)).abs() > 1e-10 {
                return Err(Error::Input(format!(
                    "large-violation construction lost accuracy at ({i}, {j}): {uu}, {vv}"
                )));
            }
        }
    }

    // w_i = (u_i ⊕ v_i)/√2 is orthonormal in H1 ⊕ H2.
    let dim = 2 * n;
    let w: Vec<ComplexVector> = (0..n)
        .map(|i| {
            ComplexVector::from_fn(dim, |k, _| {
                if k < n {
                    u[i][k]
                } else {
                    v[i][k - n]
                }
            }) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        })
        .collect();
    let mut psi = ComplexVector::zeros(dim);
    for wi in &w {
        psi += wi;
    }
    psi /= c(nf.sqrt(), 0.0);

    let half = |first: bool| Projector::diagonal(&(0..dim).map(|k| (k < n) == first).collect::<Vec<_>>());
    let halves = [half(true), half(false)];
    let mut ops = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for (k, h) in halves.iter().enumerate() {
        for (i, wi) in w.iter().enumerate() {
            ops.push(ClassOperator::chain(h.matrix() * outer(wi, wi), vec![(0, i), (1, k)]));
            labels.push(format!("{}{}", if k == 0 { "u" } else { "v" }, i + 1));
        }
    }
    let set = HistorySet::new(InitialState::Pure(psi), ops, Some(labels), true)?;
    Ok(AppendixDSet {
        set,
        expected_mpv: (nf - 1.0) * eps / 2.0,
        u,
        v,
    })
}

// ---------------------------------------------------------------------------
// Zeno family

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZenoParams {
    pub n: usize,
    pub epsilon: f64,
}

impl ZenoParams {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::out_of_range("n", n as f64, "n >= 1"));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&epsilon) {
            return Err(Error::out_of_range("epsilon", epsilon, "0 <= epsilon < pi/2"));
        }
        Ok(ZenoParams { n, epsilon })
    }

    /// Total rotation `θ` split into `n` steps of `θ/n`.
    pub fn from_theta(n: usize, theta: f64) -> Result<Self> {
        Self::new(n, theta / n.max(1) as f64)
    }

    pub fn theta(&self) -> f64 {
        self.epsilon * self.n as f64
    }
}

/// `{P^k_+, P^k_-}`: projectors onto the qubit basis rotated by `kε`.
pub fn zeno_decomposition(k: usize, epsilon: f64) -> Vec<Projector> {
    let t = k as f64 * epsilon;
    let plus = ComplexVector::from_vec(vec![c(t.cos(), 0.0), c(t.sin(), 0.0)]);
    let minus = ComplexVector::from_vec(vec![c(-t.sin(), 0.0), c(t.cos(), 0.0)]);
    vec![
        Projector::onto(&plus).expect("unit vector"),
        Projector::onto(&minus).expect("unit vector"),
    ]
}

/// Signs `(α_1, …, α_n)` of history `h`, `true` meaning `−`. The first step
/// is the most significant bit, matching [`crate::histories::build_chain_operators`].
pub fn zeno_signs(n: usize, h: usize) -> Vec<bool> {
    (1..=n).map(|k| (h >> (n - k)) & 1 == 1).collect()
}

/// Number of sign changes along `(+, α_1, …, α_n)`.
pub fn zeno_transitions(signs: &[bool]) -> usize {
    let mut prev = false;
    let mut count = 0;
    for &s in signs {
        if s != prev {
            count += 1;
        }
        prev = s;
    }
    count
}

/// Real amplitude of `C_α u⁰_+` along `u^n_{α_n}` for a history with `m` transitions.
pub fn zeno_amplitude(n: usize, m: usize, epsilon: f64) -> f64 {
    let sign = if m.div_ceil(2).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * epsilon.cos().powi((n - m) as i32) * epsilon.sin().powi(m as i32)
}

/// Closed-form decoherence matrix entry for histories `a` and `b`.
pub fn zeno_entry(n: usize, epsilon: f64, a: usize, b: usize) -> f64 {
    let ma = zeno_transitions(&zeno_signs(n, a));
    let mb = zeno_transitions(&zeno_signs(n, b));
    if ma % 2 != mb % 2 {
        return 0.0;
    }
    zeno_amplitude(n, ma, epsilon) * zeno_amplitude(n, mb, epsilon)
}

fn in_class(m: usize, class: SignClass) -> bool {
    match class {
        SignClass::X => matches!(m % 4, 0 | 3),
        SignClass::Y => matches!(m % 4, 1 | 2),
    }
}

/// Indices of the histories in sign class X (`|α| ≡ 0, 3 mod 4`) or Y.
pub fn zeno_class_members(n: usize, class: SignClass) -> Vec<usize> {
    (0..(1usize << n))
        .filter(|&h| in_class(zeno_transitions(&zeno_signs(n, h)), class))
        .collect()
}

/// Explicit `2^n`-history Zeno set on the initial state `(1, 0)`.
pub fn zeno_set(p: &ZenoParams) -> Result<HistorySet> {
    if p.n > ZENO_EXPLICIT_MAX {
        return Err(Error::out_of_range(
            "n",
            p.n as f64,
            format!("n <= {ZENO_EXPLICIT_MAX} for explicit enumeration; use zeno_closed_form"),
        ));
    }
    let decomps = (1..=p.n).map(|k| zeno_decomposition(k, p.epsilon)).collect();
    let psi = ComplexVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
    let set = HistorySet::from_chain(InitialState::Pure(psi), decomps)?;
    let labels = (0..set.len())
        .map(|h| zeno_signs(p.n, h).iter().map(|&s| if s { '-' } else { '+' }).collect())
        .collect();
    set.with_labels(labels)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZenoClass {
    pub transitions: usize,
    pub multiplicity: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZenoClosedForm {
    pub n: usize,
    pub epsilon: f64,
    pub theta: f64,
    pub classes: Vec<ZenoClass>,
    pub max_off_diagonal: f64,
    pub x_violation: f64,
    pub y_violation: f64,
    pub x_asymptotic: f64,
    pub y_asymptotic: f64,
    pub x_residual: f64,
    pub y_residual: f64,
}

/// Large-`n` limits of the X and Y violations at fixed `θ = nε`.
pub fn zeno_asymptotics(theta: f64) -> (f64, f64) {
    let (ch, c_, s, sh) = (theta.cosh(), theta.cos(), theta.sin(), theta.sinh());
    let x = 0.5 * ch * ch + 0.5 * c_ * ch - 0.5 * s * sh - 1.0;
    let y = 0.5 * ch * ch - 0.5 * c_ * ch + 0.5 * s * sh;
    (x, y)
}

/// Grouped evaluation in `O(n²)`: histories with the same transition count
/// share one state, so sums over classes are weighted by binomials.
pub fn zeno_closed_form(p: &ZenoParams) -> ZenoClosedForm {
    let n = p.n;
    let (ln_cos, ln_sin) = (p.epsilon.cos().ln(), p.epsilon.sin().ln());
    // ln |a_m| and ln C(n, m), guarding 0·ln 0 at m = 0.
    let ln_abs_amp = |m: usize| {
        let mut v = (n - m) as f64 * ln_cos;
        if m > 0 {
            v += m as f64 * ln_sin;
        }
        v
    };
    let mut ln_binom = vec![0.0; n + 1];
    for m in 1..=n {
        ln_binom[m] = ln_binom[m - 1] + ((n - m + 1) as f64).ln() - (m as f64).ln();
    }
    let sign = |m: usize| if m.div_ceil(2).is_multiple_of(2) { 1.0 } else { -1.0 };

    let classes: Vec<ZenoClass> = (0..=n)
        .map(|m| ZenoClass {
            transitions: m,
            multiplicity: ln_binom[m].exp(),
            amplitude: sign(m) * ln_abs_amp(m).exp(),
        })
        .collect();

    let violation = |class: SignClass| {
        let mut total = 0.0;
        for parity in 0..2 {
            let (mut weight, mut weight_sq) = (0.0, 0.0);
            for m in (parity..=n).step_by(2).filter(|&m| in_class(m, class)) {
                weight += sign(m) * (ln_binom[m] + ln_abs_amp(m)).exp();
                weight_sq += (ln_binom[m] + 2.0 * ln_abs_amp(m)).exp();
            }
            total += weight * weight - weight_sq;
        }
        total
    };
    let x_violation = violation(SignClass::X);
    let y_violation = violation(SignClass::Y);

    let mut max_off = f64::NEG_INFINITY;
    for (m, class) in classes.iter().enumerate() {
        for m2 in (m..=n).step_by(2) {
            // A class with one history has no off-diagonal partner inside it.
            if m == m2 && class.multiplicity < 1.5 {
                continue;
            }
            max_off = max_off.max(ln_abs_amp(m) + ln_abs_amp(m2));
        }
    }
    let max_off_diagonal = if max_off.is_finite() { max_off.exp() } else { 0.0 };

    let theta = p.theta();
    let (x_asymptotic, y_asymptotic) = zeno_asymptotics(theta);
    ZenoClosedForm {
        n,
        epsilon: p.epsilon,
        theta,
        classes,
        max_off_diagonal,
        x_violation,
        y_violation,
        x_asymptotic,
        y_asymptotic,
        x_residual: (x_violation - x_asymptotic).abs(),
        y_residual: (y_violation - y_asymptotic).abs(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem6Witness {
    pub theta: f64,
    pub n: usize,
    pub epsilon: f64,
    pub max_off_diagonal: f64,
    pub violation: f64,
    pub class: SignClass,
}

/// Finds a Zeno set whose off-diagonal entries are all at most
/// `max_off_diagonal` in modulus while some coarse-graining changes a
/// probability by more than `violation`.
pub fn theorem6_witness(max_off_diagonal: f64, violation: f64) -> Result<Theorem6Witness> {
    if !(max_off_diagonal > 0.0) {
        return Err(Error::out_of_range("epsilon_t", max_off_diagonal, "epsilon_t > 0"));
    }
    if !(violation > 0.0 && violation.is_finite()) {
        return Err(Error::out_of_range("x", violation, "x > 0"));
    }
    let mut theta = 1.0_f64;
    while theta.cosh().powi(2) <= 2.0 * (violation + 1.0) {
        theta += 1.0;
    }
    loop {
        let n_min = ((theta / max_off_diagonal.sqrt()).ceil() as usize).max(theta.ceil() as usize).max(1);
        for n in n_min..=(4 * n_min + 16) {
            let z = zeno_closed_form(&ZenoParams::from_theta(n, theta)?);
            let (value, class) = if z.x_violation.abs() >= z.y_violation.abs() {
                (z.x_violation.abs(), SignClass::X)
            } else {
                (z.y_violation.abs(), SignClass::Y)
            };
            if z.max_off_diagonal <= max_off_diagonal && value > violation {
                return Ok(Theorem6Witness {
                    theta,
                    n,
                    epsilon: z.epsilon,
                    max_off_diagonal: z.max_off_diagonal,
                    violation: value,
                    class,
                });
            }
        }
        theta += 1.0;
    }
}

// ---------------------------------------------------------------------------
// Perturbed projectors

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbParams {
    pub d: usize,
    pub rank_p: usize,
    pub samples: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl PerturbParams {
    pub fn validate(&self) -> Result<()> {
        if self.rank_p < 2 || self.d < self.rank_p + 2 {
            return Err(Error::out_of_range(
                "rank_p",
                self.rank_p as f64,
                "2 <= rank_p <= d - 2 (two base histories on each side of the projector)",
            ));
        }
        if self.samples == 0 {
            return Err(Error::out_of_range("samples", 0.0, "samples >= 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::out_of_range("epsilon", self.epsilon, "epsilon > 0"));
        }
        Ok(())
    }
}

/// Two history states `u_1, u_2` and a projector `P` with
/// `Re(u_α† P u_β) = Re(u_α† P̄ u_β) = 0` for `α ≠ β`.
#[derive(Debug, Clone)]
pub struct PerturbBase {
    pub projector: Projector,
    pub states: [ComplexVector; 2],
}

impl PerturbBase {
    pub fn new(d: usize, rank_p: usize) -> Self {
        let projector = Projector::diagonal(&(0..d).map(|k| k < rank_p).collect::<Vec<_>>());
        let state = |k: usize| {
            ComplexVector::from_fn(d, |i, _| if i == k || i == rank_p + k { c(0.5, 0.0) } else { c(0.0, 0.0) })
        };
        PerturbBase {
            projector,
            states: [state(0), state(1)],
        }
    }
}

/// Leading-order DHC terms
/// `|Im(u_1† P A P̄ u_2)| / (‖P u_1‖ ‖P A P̄ u_2‖)` and
/// `|Re(u_1† P̄ A P A P̄ u_2)| / (‖P A P̄ u_1‖ ‖P A P̄ u_2‖)`.
/// `None` when a denominator vanishes (for example `[A, P] = 0`).
pub fn dhc_terms(base: &PerturbBase, a: &ComplexMatrix) -> Option<(f64, f64)> {
    let p = base.projector.matrix();
    let q = base.projector.complement();
    let q = q.matrix();
    let [u1, u2] = &base.states;
    let leak = |u: &ComplexVector| p * (a * (q * u));
    let (l1, l2) = (leak(u1), leak(u2));
    let (n1, n2) = (l1.norm(), l2.norm());
    let pu1 = (p * u1).norm();
    if n1 <= 1e-12 || n2 <= 1e-12 || pu1 <= 1e-12 {
        return None;
    }
    let t1 = inner(&(p * u1), &l2).im.abs() / (pu1 * n2);
    let t2 = inner(&l1, &l2).re.abs() / (n1 * n2);
    Some((t1, t2))
}

/// Decoherence matrix of the eight histories `Y X u_α` with
/// `X ∈ {P, P̄}`, `Y ∈ {P', P̄'}` and `P' = U† P U`, `U = exp(iεA)`.
/// History index is `4α + 2x + y`.
pub fn perturbed_decoherence(base: &PerturbBase, a: &HermitianPerturbation, epsilon: f64) -> DecoherenceMatrix {
    let p = base.projector.matrix();
    let perturbed = |v: &ComplexVector| a.evolve(epsilon, &(p * a.evolve(-epsilon, v)));
    let mut states = Vec::with_capacity(8);
    for s in &base.states {
        let inside = p * s;
        let outside = s - &inside;
        for x in [inside, outside] {
            let y = perturbed(&x);
            let y_bar = &x - &y;
            states.push(y);
            states.push(y_bar);
        }
    }
    DecoherenceMatrix::from_states(&states, true)
}

/// A Hermitian matrix with its eigendecomposition cached, so that
/// `exp(iεA)` can be applied to vectors without forming the matrix.
#[derive(Debug, Clone)]
pub struct HermitianPerturbation {
    pub matrix: ComplexMatrix,
    values: Vec<f64>,
    vectors: ComplexMatrix,
}

impl HermitianPerturbation {
    pub fn new(matrix: ComplexMatrix) -> Self {
        let eig = nalgebra::SymmetricEigen::new(matrix.clone());
        HermitianPerturbation {
            matrix,
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    /// `exp(-iεA) v`; `U† = exp(-iεA)` for `U = exp(iεA)`.
    pub fn evolve(&self, epsilon: f64, v: &ComplexVector) -> ComplexVector {
        let mut w = self.vectors.ad_mul(v);
        for (z, &l) in w.iter_mut().zip(&self.values) {
            *z *= C64::from_polar(1.0, -epsilon * l);
        }
        &self.vectors * w
    }

    pub fn unitary(&self, epsilon: f64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &l) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, epsilon * l);
            for z in scaled.column_mut(k).iter_mut() {
                *z *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Hermitian matrix from the unitary-invariant Gaussian ensemble: standard
/// normal diagonal, off-diagonal real and imaginary parts `N(0, 1/2)`.
pub fn sample_gue<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        m[(i, i)] = c(rng.sample(StandardNormal), 0.0);
        for j in (i + 1)..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = c(re * s, im * s);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Per-sample generator: stream `index` of the seeded ChaCha8 generator.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub params: PerturbParams,
    pub samples_used: usize,
    pub flagged: usize,
    /// Reference scale `r^{-1/2}`.
    pub expected: f64,
    /// Leading-order mean of either term, `(πr)^{-1/2} ≈ 0.564 r^{-1/2}`.
    pub predicted: f64,
    pub term1_mean: f64,
    pub term1_stderr: f64,
    pub term2_mean: f64,
    pub term2_stderr: f64,
    /// Mean DHC ratios of the matching history pairs of the full perturbed
    /// set at the smallest `ε`.
    pub measured_term1_mean: f64,
    pub measured_term2_mean: f64,
    pub epsilons: Vec<f64>,
    pub mean_max_off_diagonal: Vec<f64>,
    pub slope: f64,
}

struct SampleOutcome {
    terms: Option<(f64, f64)>,
    measured: Option<(f64, f64)>,
    max_off: Vec<f64>,
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Monte Carlo estimate of the DHC terms created by a random unitary
/// perturbation of a projector, and of the first-order scaling of the
/// off-diagonal decoherence entries. Results depend only on the seed and
/// sample count.
pub fn perturbation_experiment(p: &PerturbParams) -> Result<PerturbationReport> {
    p.validate()?;
    let base = PerturbBase::new(p.d, p.rank_p);
    let epsilons = vec![p.epsilon, p.epsilon / 2.0, p.epsilon / 4.0];

    let outcomes: Vec<SampleOutcome> = (0..p.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(p.seed, i as u64);
            let a = HermitianPerturbation::new(sample_gue(p.d, &mut rng));
            let terms = dhc_terms(&base, &a.matrix);
            let mut max_off = Vec::with_capacity(epsilons.len());
            let mut measured = None;
            for &e in &epsilons {
                let dm = perturbed_decoherence(&base, &a, e);
                let mut m: f64 = 0.0;
                for x in 0..dm.n() {
                    for y in (x + 1)..dm.n() {
                        m = m.max(dm.get(x, y).re.abs());
                    }
                }
                max_off.push(m);
                // (u1, P, P') vs (u2, P̄, P') and (u1, P̄, P') vs (u2, P̄, P').
                let ratio = |x: usize, y: usize| {
                    let (px, py) = (dm.get(x, x).re, dm.get(y, y).re);
                    dm.get(x, y).re.abs() / (px * py).sqrt()
                };
                measured = terms.map(|_| (ratio(0, 6), ratio(2, 6)));
            }
            SampleOutcome { terms, measured, max_off }
        })
        .collect();

    let valid: Vec<&SampleOutcome> = outcomes.iter().filter(|o| o.terms.is_some()).collect();
    let t1: Vec<f64> = valid.iter().map(|o| o.terms.unwrap().0).collect();
    let t2: Vec<f64> = valid.iter().map(|o| o.terms.unwrap().1).collect();
    let m1: Vec<f64> = valid.iter().filter_map(|o| o.measured.map(|m| m.0)).collect();
    let m2: Vec<f64> = valid.iter().filter_map(|o| o.measured.map(|m| m.1)).collect();
    let (term1_mean, term1_stderr) = mean_stderr(&t1);
    let (term2_mean, term2_stderr) = mean_stderr(&t2);
    let mean_max_off_diagonal: Vec<f64> = (0..epsilons.len())
        .map(|k| outcomes.iter().map(|o| o.max_off[k]).sum::<f64>() / outcomes.len() as f64)
        .collect();
    let slope = log_log_slope(&epsilons, &mean_max_off_diagonal);

    Ok(PerturbationReport {
        params: *p,
        samples_used: valid.len(),
        flagged: outcomes.len() - valid.len(),
        expected: (p.rank_p as f64).powf(-0.5),
        predicted: (std::f64::consts::PI * p.rank_p as f64).powf(-0.5),
        term1_mean,
        term1_stderr,
        term2_mean,
        term2_stderr,
        measured_term1_mean: mean_stderr(&m1).0,
        measured_term2_mean: mean_stderr(&m2).0,
        epsilons,
        mean_max_off_diagonal,
        slope,
    })
}

// ---------------------------------------------------------------------------
// Random near-consistent sets

/// `n ≤ 2d` history states that are exactly weakly consistent (orthogonal
/// real embeddings, random weights) plus complex Gaussian noise of scale
/// `noise`, rescaled so the probabilities sum to one. The states are realised
/// as rank-one class operators `u_α e_1†` acting on `e_1`.
pub fn random_near_consistent_set(d: usize, n: usize, noise: f64, seed: u64) -> Result<HistorySet> {
    if d == 0 || n == 0 {
        return Err(Error::Input("random set needs d >= 1 and n >= 1".into()));
    }
    if n > 2 * d {
        return Err(Error::out_of_range(
            "n",
            n as f64,
            format!("n <= 2d = {}: at most 2d weakly orthogonal non-null histories", 2 * d),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real_dim = 2 * d;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..real_dim).map(|_| rng.sample(StandardNormal)).collect();
        for q in &basis {
            let proj: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut states: Vec<ComplexVector> = basis
        .iter()
        .zip(&weights)
        .map(|(v, w)| {
            let amp = (w / total).sqrt();
            ComplexVector::from_fn(d, |i, _| {
                let g_re: f64 = rng.sample(StandardNormal);
                let g_im: f64 = rng.sample(StandardNormal);
                c(amp * v[i] + noise * g_re, amp * v[d + i] + noise * g_im)
            })
        })
        .collect();
    let norm_sq: f64 = states.iter().map(|s| s.norm_squared()).sum();
    for s in &mut states {
        *s /= c(norm_sq.sqrt(), 0.0);
    }
    let e1 = ComplexVector::from_fn(d, |i, _| if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let ops = states.iter().map(|s| ClassOperator::raw(outer(s, &e1))).collect();
    HistorySet::new(InitialState::Pure(e1), ops, None, false)
}
