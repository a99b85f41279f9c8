//! Dense complex linear algebra used throughout the crate: projectors,
//! density matrices, purification and the real embedding of history states.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use std::cmp::Ordering;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexVector = DVector<C64>;
pub type ComplexMatrix = DMatrix<C64>;

/// Absolute entrywise tolerance for projector and density-matrix validation.
pub const PROJ_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff used to decide the rank of a density matrix.
pub const RANK_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entrywise modulus of `m`.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Outer product `|a⟩⟨b|`.
pub fn outer(a: &ComplexVector, b: &ComplexVector) -> ComplexMatrix {
    a * b.adjoint()
}

/// Hermitian inner product `⟨a|b⟩ = a† b`.
pub fn inner(a: &ComplexVector, b: &ComplexVector) -> C64 {
    a.dotc(b)
}

/// An orthogonal projector on a finite-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    /// Validates `P = P†`, `P² = P` and integral trace, all within [`PROJ_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::validated(matrix, 0)
    }

    fn validated(matrix: ComplexMatrix, index: usize) -> Result<Self> {
        ensure_square(&matrix)?;
        let herm = hermitian_deviation(&matrix);
        if herm > PROJ_TOL {
            return Err(Error::InvalidProjector {
                index,
                reason: format!("not Hermitian (deviation {herm:.3e})"),
            });
        }
        let idem = max_abs(&(&matrix * &matrix - &matrix));
        if idem > PROJ_TOL {
            return Err(Error::InvalidProjector {
                index,
                reason: format!("not idempotent (deviation {idem:.3e})"),
            });
        }
        let trace = matrix.trace().re;
        let rank = trace.round();
        if (trace - rank).abs() > PROJ_TOL || rank < 0.0 {
            return Err(Error::InvalidProjector {
                index,
                reason: format!("trace {trace} is not an integer"),
            });
        }
        Ok(Projector {
            matrix,
            rank: rank as usize,
        })
    }

    /// Rank-one projector onto the span of `v` (which need not be normalised).
    pub fn onto(v: &ComplexVector) -> Result<Self> {
        let norm_sq = v.norm_squared();
        if norm_sq == 0.0 {
            return Err(Error::Input("cannot project onto the zero vector".into()));
        }
        Self::new(outer(v, v).unscale(norm_sq))
    }

    /// Diagonal projector selecting the basis vectors where `mask` is true.
    pub fn diagonal(mask: &[bool]) -> Self {
        let d = mask.len();
        let matrix = ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j && mask[i] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let rank = mask.iter().filter(|&&b| b).count();
        Projector { matrix, rank }
    }

    pub fn complement(&self) -> Projector {
        let d = self.dim();
        Projector {
            matrix: ComplexMatrix::identity(d, d) - &self.matrix,
            rank: d - self.rank,
        }
    }

    /// `U† P U` for a unitary `U`.
    pub fn conjugated(&self, unitary: &ComplexMatrix) -> Result<Projector> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "unitary conjugation".into(),
                expected: self.dim(),
                found: unitary.nrows(),
            });
        }
        Projector::new(unitary.adjoint() * &self.matrix * unitary)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Outcome of [`validate_projector_decomposition`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionCheck {
    pub valid: bool,
    pub rank_sum: usize,
    pub diagnostic: Option<String>,
}

/// Checks that `ps` is a projective decomposition of the identity:
/// `Σ Pᵢ = 1` and `Pᵢ Pⱼ = 0` for `i ≠ j`.
pub fn validate_projector_decomposition(ps: &[Projector]) -> Result<DecompositionCheck> {
    let Some(first) = ps.first() else {
        return Err(Error::Input("empty projector decomposition".into()));
    };
    let d = first.dim();
    for (i, p) in ps.iter().enumerate() {
        if p.dim() != d {
            return Err(Error::DimensionMismatch {
                context: format!("projector {i} versus projector 0"),
                expected: d,
                found: p.dim(),
            });
        }
    }
    let rank_sum = ps.iter().map(Projector::rank).sum();

    let mut sum = ComplexMatrix::zeros(d, d);
    for p in ps {
        sum += p.matrix();
    }
    let dev = max_abs(&(sum - ComplexMatrix::identity(d, d)));
    if dev > PROJ_TOL {
        return Ok(DecompositionCheck {
            valid: false,
            rank_sum,
            diagnostic: Some(format!("sum of projectors differs from identity by {dev:.3e}")),
        });
    }
    for i in 0..ps.len() {
        for j in (i + 1)..ps.len() {
            let overlap = max_abs(&(ps[i].matrix() * ps[j].matrix()));
            if overlap > PROJ_TOL {
                return Ok(DecompositionCheck {
                    valid: false,
                    rank_sum,
                    diagnostic: Some(format!(
                        "projectors {i} and {j} are not orthogonal ({overlap:.3e})"
                    )),
                });
            }
        }
    }
    Ok(DecompositionCheck {
        valid: true,
        rank_sum,
        diagnostic: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    kind: StateKind,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within [`PROJ_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        ensure_square(&matrix)?;
        let deviation = hermitian_deviation(&matrix);
        if deviation > PROJ_TOL {
            return Err(Error::NotHermitian {
                what: "density matrix",
                deviation,
            });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > PROJ_TOL {
            return Err(Error::BadTrace { trace });
        }
        let eig = hermitian_eigen(&matrix);
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -PROJ_TOL {
            return Err(Error::NotPositive { eigenvalue: min });
        }
        let max = eig.values[0];
        let rank = eig.values.iter().filter(|&&v| v > RANK_TOL * max).count();
        let kind = if rank == 1 {
            StateKind::Pure
        } else {
            StateKind::Mixed
        };
        Ok(DensityMatrix { matrix, kind })
    }

    pub fn from_pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > PROJ_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(DensityMatrix {
            matrix: outer(psi, psi),
            kind: StateKind::Pure,
        })
    }

    /// Mixture `Σ pᵢ |ψᵢ⟩⟨ψᵢ|`.
    pub fn mixture(weights: &[f64], states: &[ComplexVector]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::Input("mixture needs one weight per state".into()));
        }
        let d = states[0].len();
        let mut m = ComplexMatrix::zeros(d, d);
        for (p, s) in weights.iter().zip(states) {
            if s.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "mixture component".into(),
                    expected: d,
                    found: s.len(),
                });
            }
            m += outer(s, s) * C64::from(*p);
        }
        DensityMatrix::new(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted
/// descending. Each eigenvector's phase is fixed so that its first
/// largest-modulus entry is real and positive; equal eigenvalues are ordered
/// by lexicographic comparison of their eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<ComplexVector>,
}

pub fn hermitian_eigen(m: &ComplexMatrix) -> HermitianEigen {
    let eig = SymmetricEigen::new(m.clone());
    let mut pairs: Vec<(f64, ComplexVector)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &val)| (val, fix_phase(eig.eigenvectors.column(k).into_owned())))
        .collect();
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| lexicographic(&a.1, &b.1))
    });
    let (values, vectors) = pairs.into_iter().unzip();
    HermitianEigen { values, vectors }
}

fn fix_phase(mut v: ComplexVector) -> ComplexVector {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v;
    }
    if let Some(pivot) = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)) {
        let phase = pivot.conj() / pivot.norm();
        v *= phase;
    }
    v
}

fn lexicographic(a: &ComplexVector, b: &ComplexVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = x
            .re
            .partial_cmp(&y.re)
            .unwrap_or(Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// `exp(i t A)` for Hermitian `A`, through its eigendecomposition.
pub fn unitary_exp(a: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let eig = SymmetricEigen::new(a.clone());
    let v = &eig.eigenvectors;
    let phases = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, t * l)),
    ));
    v * phases * v.adjoint()
}

/// A pure state in `H ⊗ H_anc` whose reduced state on `H` is the purified
/// density matrix. Entry ordering is `system_index * ancilla + ancilla_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct Purification {
    pub state: ComplexVector,
    pub system_dim: usize,
    pub ancilla_dim: usize,
}

impl Purification {
    /// Dimension `N = d·r` of the enlarged space.
    pub fn extended_dim(&self) -> usize {
        self.system_dim * self.ancilla_dim
    }

    /// Extends an operator on `H` to `A ⊗ 1`.
    pub fn extend(&self, op: &ComplexMatrix) -> ComplexMatrix {
        extend_operator(op, self.ancilla_dim)
    }
}

pub fn purify(rho: &DensityMatrix) -> Result<Purification> {
    let eig = hermitian_eigen(rho.matrix());
    if let Some(&min) = eig.values.last() {
        if min < -PROJ_TOL {
            return Err(Error::NotPositive { eigenvalue: min });
        }
    }
    let max = eig.values[0];
    let rank = eig.values.iter().filter(|&&v| v > RANK_TOL * max).count();
    let d = rho.dim();
    let mut state = ComplexVector::zeros(d * rank);
    for (i, (p, v)) in eig.values.iter().zip(&eig.vectors).take(rank).enumerate() {
        let amp = p.sqrt();
        for a in 0..d {
            state[a * rank + i] = v[a] * amp;
        }
    }
    Ok(Purification {
        state,
        system_dim: d,
        ancilla_dim: rank,
    })
}

pub fn extend_operator(op: &ComplexMatrix, ancilla_dim: usize) -> ComplexMatrix {
    if ancilla_dim == 1 {
        return op.clone();
    }
    op.kronecker(&ComplexMatrix::identity(ancilla_dim, ancilla_dim))
}

/// Traces out the ancilla factor of a state in `H ⊗ H_anc`.
pub fn partial_trace_ancilla(state: &ComplexVector, system_dim: usize, ancilla_dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(system_dim, system_dim, |a, b| {
        (0..ancilla_dim)
            .map(|i| state[a * ancilla_dim + i] * state[b * ancilla_dim + i].conj())
            .sum()
    })
}

/// `Re(u) ⊕ Im(u)` in `R^{2N}`. Weak consistency of two history states is
/// orthogonality of their real embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct RealHistoryVector(Vec<f64>);

impl RealHistoryVector {
    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, other: &RealHistoryVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

pub fn real_embed(u: &ComplexVector) -> RealHistoryVector {
    let mut v = Vec::with_capacity(2 * u.len());
    v.extend(u.iter().map(|z| z.re));
    v.extend(u.iter().map(|z| z.im));
    RealHistoryVector(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(entries: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            entries.len(),
            entries.iter().map(|&x| c(x, 0.0)),
        ))
    }

    #[test]
    fn complementary_diagonal_projectors() {
        let p = Projector::new(diag(&[1.0, 0.0])).unwrap();
        let check = validate_projector_decomposition(&[p.clone(), p.complement()]).unwrap();
        assert!(check.valid);
        assert_eq!(check.rank_sum, 2);
    }

    #[test]
    fn duplicated_projector_is_rejected() {
        let p = Projector::new(diag(&[1.0, 0.0])).unwrap();
        let check = validate_projector_decomposition(&[p.clone(), p]).unwrap();
        assert!(!check.valid);
        assert!(check.diagnostic.unwrap().contains("identity"));
    }

    #[test]
    fn rotated_qubit_basis_is_a_decomposition() {
        let e = 0.3_f64;
        let plus = ComplexVector::from_vec(vec![c(e.cos(), 0.0), c(e.sin(), 0.0)]);
        let minus = ComplexVector::from_vec(vec![c(-e.sin(), 0.0), c(e.cos(), 0.0)]);
        let ps = [Projector::onto(&plus).unwrap(), Projector::onto(&minus).unwrap()];
        assert!(validate_projector_decomposition(&ps).unwrap().valid);
    }

    #[test]
    fn mismatched_dimensions_name_indices() {
        let a = Projector::new(diag(&[1.0, 0.0])).unwrap();
        let b = Projector::new(diag(&[1.0, 0.0, 0.0])).unwrap();
        let err = validate_projector_decomposition(&[a, b]).unwrap_err();
        assert!(err.to_string().contains("projector 1"));
    }

    #[test]
    fn non_idempotent_matrix_is_not_a_projector() {
        assert!(Projector::new(diag(&[0.5, 0.0])).is_err());
    }

    #[test]
    fn purify_pure_state_returns_the_state() {
        let psi = ComplexVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let pur = purify(&rho).unwrap();
        assert_eq!(pur.ancilla_dim, 1);
        assert_eq!(pur.extended_dim(), 3);
        assert_abs_diff_eq!((pur.state - psi).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn purify_maximally_mixed_qubit() {
        let rho = DensityMatrix::new(diag(&[0.5, 0.5])).unwrap();
        assert_eq!(rho.kind(), StateKind::Mixed);
        let pur = purify(&rho).unwrap();
        assert_eq!(pur.extended_dim(), 4);
        let back = partial_trace_ancilla(&pur.state, 2, 2);
        assert!(max_abs(&(back - rho.matrix())) < PROJ_TOL);
    }

    #[test]
    fn negative_density_matrix_is_rejected() {
        let err = DensityMatrix::new(diag(&[1.2, -0.2])).unwrap_err();
        assert!(matches!(err, Error::NotPositive { .. }));
    }

    #[test]
    fn real_embedding_of_simple_vector() {
        let s = 0.5_f64.sqrt();
        let u = ComplexVector::from_vec(vec![c(s, 0.0), c(0.0, s)]);
        assert_eq!(real_embed(&u).entries(), &[s, 0.0, 0.0, s]);
    }

    #[test]
    fn phase_factor_i_is_real_orthogonal() {
        let u = ComplexVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let w = &u * c(0.0, 1.0);
        assert_eq!(inner(&u, &w), c(0.0, 1.0));
        assert_eq!(real_embed(&u).dot(&real_embed(&w)), 0.0);
    }

    #[test]
    fn unitary_exp_is_unitary() {
        let a = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.3, -0.2), c(0.3, 0.2), c(-0.5, 0.0)],
        );
        let u = unitary_exp(&a, 0.7);
        let id = ComplexMatrix::identity(2, 2);
        assert!(max_abs(&(u.adjoint() * &u - id)) < 1e-13);
    }

    #[test]
    fn orthogonal_family_in_real_embedding_is_capped_at_2d() {
        // Gram-Schmidt over 2d+1 candidates in C^d keeps at most 2d non-null
        // real-orthogonal vectors.
        use rand::{Rng, SeedableRng};
        let d = 3;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut kept: Vec<RealHistoryVector> = Vec::new();
        for _ in 0..(2 * d + 1) {
            let u = ComplexVector::from_fn(d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let mut v = real_embed(&u).entries().to_vec();
            for q in &kept {
                let proj: f64 = v.iter().zip(q.entries()).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(q.entries()) {
                    *x -= proj * y;
                }
            }
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-8 {
                kept.push(RealHistoryVector(v.into_iter().map(|x| x / n).collect()));
            }
        }
        assert_eq!(kept.len(), 2 * d);
    }
}
