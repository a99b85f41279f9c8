//! History sets, class operators and the decoherence matrix.

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_square, inner, max_abs, outer, purify, validate_projector_decomposition, ComplexMatrix,
    ComplexVector, DensityMatrix, Projector, C64, PROJ_TOL,
};

/// Tolerance for `Σ C_α = 1` and for the unit total sum of the decoherence matrix.
pub const COMPLETE_TOL: f64 = 1e-8;
/// Probability at or below which a history or branch counts as null.
pub const NULL_TOL: f64 = 1e-12;
/// Hermiticity and diagonal-sign tolerance for decoherence matrices.
pub const DECOHERENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorForm {
    Raw,
    /// `(step, projector index)` pairs, earliest step first.
    Chain(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassOperator {
    matrix: ComplexMatrix,
    form: OperatorForm,
}

impl ClassOperator {
    pub fn raw(matrix: ComplexMatrix) -> Self {
        ClassOperator {
            matrix,
            form: OperatorForm::Raw,
        }
    }

    pub fn chain(matrix: ComplexMatrix, path: Vec<(usize, usize)>) -> Self {
        ClassOperator {
            matrix,
            form: OperatorForm::Chain(path),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::raw(ComplexMatrix::identity(d, d))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn form(&self) -> &OperatorForm {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Operator product `self · earlier` (i.e. `earlier` acts first).
    pub fn after(&self, earlier: &ClassOperator) -> ClassOperator {
        ClassOperator::raw(&self.matrix * &earlier.matrix)
    }

    pub fn scaled(&self, factor: f64) -> ClassOperator {
        ClassOperator {
            matrix: &self.matrix * C64::from(factor),
            form: self.form.clone(),
        }
    }
}

/// One class operator per element of the Cartesian product of the
/// decompositions, each the time-ordered product with the latest projector
/// leftmost. Histories are ordered with the earliest step varying slowest.
pub fn build_chain_operators(decomps: &[Vec<Projector>]) -> Result<Vec<ClassOperator>> {
    let Some(first) = decomps.first().and_then(|d| d.first()) else {
        return Err(Error::Input("no projector decompositions supplied".into()));
    };
    let dim = first.dim();
    for (step, decomp) in decomps.iter().enumerate() {
        let check = validate_projector_decomposition(decomp).map_err(|e| Error::InvalidDecomposition {
            step,
            diagnostic: e.to_string(),
        })?;
        if !check.valid {
            return Err(Error::InvalidDecomposition {
                step,
                diagnostic: check.diagnostic.unwrap_or_default(),
            });
        }
        if decomp[0].dim() != dim {
            return Err(Error::DimensionMismatch {
                context: format!("decomposition {step}"),
                expected: dim,
                found: decomp[0].dim(),
            });
        }
    }

    let mut ops: Vec<(ComplexMatrix, Vec<(usize, usize)>)> =
        vec![(ComplexMatrix::identity(dim, dim), Vec::new())];
    for (step, decomp) in decomps.iter().enumerate() {
        let mut next = Vec::with_capacity(ops.len() * decomp.len());
        for (op, path) in &ops {
            for (j, p) in decomp.iter().enumerate() {
                let mut path = path.clone();
                path.push((step, j));
                next.push((p.matrix() * op, path));
            }
        }
        ops = next;
    }
    Ok(ops
        .into_iter()
        .map(|(m, path)| ClassOperator::chain(m, path))
        .collect())
}

/// Moves explicit time evolution into the projectors: step `k` becomes
/// `U_k† P U_k` where `U_k` is the evolution from the initial time to `t_k`.
pub fn fold_time_evolution(decomps: &[Vec<Projector>], evolutions: &[ComplexMatrix]) -> Result<Vec<Vec<Projector>>> {
    if decomps.len() != evolutions.len() {
        return Err(Error::Input(format!(
            "{} decompositions but {} evolution operators",
            decomps.len(),
            evolutions.len()
        )));
    }
    decomps
        .iter()
        .zip(evolutions)
        .map(|(decomp, u)| {
            let d = ensure_square(u)?;
            let dev = max_abs(&(u.adjoint() * u - ComplexMatrix::identity(d, d)));
            if dev > PROJ_TOL {
                return Err(Error::Input(format!("evolution operator is not unitary ({dev:.3e})")));
            }
            decomp.iter().map(|p| p.conjugated(u)).collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Pure(ComplexVector),
    Mixed(DensityMatrix),
}

impl InitialState {
    pub fn dim(&self) -> usize {
        match self {
            InitialState::Pure(v) => v.len(),
            InitialState::Mixed(rho) => rho.dim(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            InitialState::Pure(v) => DensityMatrix::from_pure(v).expect("validated on construction"),
            InitialState::Mixed(rho) => rho.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HistorySet {
    initial: InitialState,
    ops: Vec<ClassOperator>,
    labels: Vec<String>,
    homogeneous: bool,
    complete: bool,
    decompositions: Option<Vec<Vec<Projector>>>,
}

impl HistorySet {
    /// A set of general class operators. Completeness (`Σ C_α = 1`) is
    /// recorded, not enforced.
    pub fn new(initial: InitialState, ops: Vec<ClassOperator>, labels: Option<Vec<String>>, homogeneous: bool) -> Result<Self> {
        let d = initial.dim();
        if let InitialState::Pure(v) = &initial {
            let norm = v.norm();
            if (norm - 1.0).abs() > PROJ_TOL {
                return Err(Error::NotNormalized { norm });
            }
        }
        if ops.is_empty() {
            return Err(Error::Input("history set has no class operators".into()));
        }
        for (i, op) in ops.iter().enumerate() {
            if op.matrix.nrows() != d || op.matrix.ncols() != d {
                return Err(Error::DimensionMismatch {
                    context: format!("class operator {i}"),
                    expected: d,
                    found: op.matrix.nrows(),
                });
            }
        }
        let labels = match labels {
            Some(l) if l.len() != ops.len() => {
                return Err(Error::Input(format!("{} labels for {} histories", l.len(), ops.len())))
            }
            Some(l) => l,
            None => (0..ops.len()).map(|i| format!("h{i}")).collect(),
        };
        let mut sum = ComplexMatrix::zeros(d, d);
        for op in &ops {
            sum += &op.matrix;
        }
        let complete = max_abs(&(sum - ComplexMatrix::identity(d, d))) <= COMPLETE_TOL;
        Ok(HistorySet {
            initial,
            ops,
            labels,
            homogeneous,
            complete,
            decompositions: None,
        })
    }

    /// Homogeneous set built from a chain of projective decompositions.
    pub fn from_chain(initial: InitialState, decomps: Vec<Vec<Projector>>) -> Result<Self> {
        let ops = build_chain_operators(&decomps)?;
        let labels = ops
            .iter()
            .map(|op| match op.form() {
                OperatorForm::Chain(path) => path
                    .iter()
                    .map(|(_, j)| j.to_string())
                    .collect::<Vec<_>>()
                    .join("."),
                OperatorForm::Raw => String::new(),
            })
            .collect();
        let mut set = HistorySet::new(initial, ops, Some(labels), true)?;
        set.decompositions = Some(decomps);
        Ok(set)
    }

    pub fn initial(&self) -> &InitialState {
        &self.initial
    }

    pub fn operators(&self) -> &[ClassOperator] {
        &self.ops
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.ops.len() {
            return Err(Error::Input(format!("{} labels for {} histories", labels.len(), self.ops.len())));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn decompositions(&self) -> Option<&[Vec<Projector>]> {
        self.decompositions.as_deref()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    /// Dimension of the space the history states live in (after purification).
    pub fn state_dim(&self) -> usize {
        match &self.initial {
            InitialState::Pure(v) => v.len(),
            InitialState::Mixed(rho) => purify(rho).map(|p| p.extended_dim()).unwrap_or(rho.dim()),
        }
    }
}

/// Path-projected states `u_α = C_α |ψ⟩`. Mixed initial states are purified
/// first and the operators extended as `C_α ⊗ 1`.
pub fn history_states(set: &HistorySet) -> Vec<ComplexVector> {
    match &set.initial {
        InitialState::Pure(psi) => set.ops.iter().map(|op| &op.matrix * psi).collect(),
        InitialState::Mixed(rho) => {
            let pur = purify(rho).expect("density matrix validated on construction");
            set.ops
                .iter()
                .map(|op| pur.extend(&op.matrix) * &pur.state)
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceMatrix {
    entries: ComplexMatrix,
    homogeneous: bool,
}

impl DecoherenceMatrix {
    pub fn new(entries: ComplexMatrix, homogeneous: bool) -> Result<Self> {
        ensure_square(&entries)?;
        let deviation = crate::linalg::hermitian_deviation(&entries);
        if deviation > DECOHERENCE_TOL {
            return Err(Error::NotHermitian {
                what: "decoherence matrix",
                deviation,
            });
        }
        if let Some(p) = entries.diagonal().iter().find(|z| z.re < -DECOHERENCE_TOL) {
            return Err(Error::Input(format!("negative probability {} on the diagonal", p.re)));
        }
        Ok(DecoherenceMatrix { entries, homogeneous })
    }

    /// Gram matrix `D_αβ = u_β† u_α` of a list of history states.
    pub fn from_states(states: &[ComplexVector], homogeneous: bool) -> Self {
        let n = states.len();
        let mut entries = ComplexMatrix::zeros(n, n);
        for a in 0..n {
            entries[(a, a)] = C64::new(states[a].norm_squared(), 0.0);
            for b in (a + 1)..n {
                let z = inner(&states[b], &states[a]);
                entries[(a, b)] = z;
                entries[(b, a)] = z.conj();
            }
        }
        DecoherenceMatrix { entries, homogeneous }
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.entries[(a, b)]
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn with_homogeneous(mut self, homogeneous: bool) -> Self {
        self.homogeneous = homogeneous;
        self
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn total(&self) -> C64 {
        self.entries.iter().sum()
    }

    pub fn null_histories(&self) -> Vec<usize> {
        self.probabilities()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p <= NULL_TOL)
            .map(|(i, _)| i)
            .collect()
    }

    /// Probability of the union of `subset` after coarse-graining, `Σ_{α,β∈S} D_αβ`.
    pub fn collected_probability(&self, subset: &[usize]) -> f64 {
        compensated_sum(subset.iter().flat_map(|&a| subset.iter().map(move |&b| (a, b))).map(|ab| self.entries[ab].re))
    }

    /// Interference within `subset`, `Σ_{α≠β∈S} D_αβ` (real by Hermiticity).
    pub fn subset_violation(&self, subset: &[usize]) -> f64 {
        let pairs = subset.iter().enumerate().flat_map(|(i, &a)| subset[i + 1..].iter().map(move |&b| (a, b)));
        2.0 * compensated_sum(pairs.map(|ab| self.entries[ab].re))
    }
}

/// Neumaier summation; long subset sums otherwise drift by ~1e-11.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + carry
}

pub fn decoherence_matrix(set: &HistorySet) -> DecoherenceMatrix {
    DecoherenceMatrix::from_states(&history_states(set), set.homogeneous)
}

/// `D_αβ = Tr(C_α ρ C_β†)` evaluated directly on the system space.
pub fn decoherence_matrix_trace(set: &HistorySet) -> DecoherenceMatrix {
    decoherence_from_density(&set.initial.density(), &set.ops, set.homogeneous)
}

/// `D_αβ = Tr(C_α ρ C_β†)` for an arbitrary density matrix and operator list.
pub fn decoherence_from_density(rho: &DensityMatrix, ops: &[ClassOperator], homogeneous: bool) -> DecoherenceMatrix {
    let evolved: Vec<ComplexMatrix> = ops.iter().map(|op| &op.matrix * rho.matrix()).collect();
    let n = ops.len();
    let mut entries = ComplexMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            // Tr(X Y†) = Σ_ij X_ij conj(Y_ij) with X = C_α ρ, Y = C_β.
            entries[(a, b)] = evolved[a]
                .iter()
                .zip(ops[b].matrix.iter())
                .map(|(x, y)| x * y.conj())
                .sum();
        }
    }
    DecoherenceMatrix { entries, homogeneous }
}

/// A collection of disjoint cells of history indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseGraining {
    cells: Vec<Vec<usize>>,
}

impl CoarseGraining {
    pub fn new(cells: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for cell in &cells {
            for &i in cell {
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, n });
                }
                if seen[i] {
                    return Err(Error::OverlappingCells { index: i });
                }
                seen[i] = true;
            }
        }
        Ok(CoarseGraining { cells })
    }

    pub fn singletons(n: usize) -> Self {
        CoarseGraining {
            cells: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn subset(indices: Vec<usize>, n: usize) -> Result<Self> {
        Self::new(vec![indices], n)
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }
}

/// `D*_bc = Σ_{α∈b, β∈c} D_αβ`. Histories outside every cell are dropped.
pub fn coarse_grain(d: &DecoherenceMatrix, g: &CoarseGraining) -> Result<DecoherenceMatrix> {
    // Re-validate against this matrix's size.
    let g = CoarseGraining::new(g.cells.clone(), d.n())?;
    let m = g.cells.len();
    let entries = ComplexMatrix::from_fn(m, m, |b, c| {
        let mut s = C64::new(0.0, 0.0);
        for &a in &g.cells[b] {
            for &bb in &g.cells[c] {
                s += d.entries[(a, bb)];
            }
        }
        s
    });
    let homogeneous = d.homogeneous && g.cells.iter().all(|c| c.len() <= 1);
    Ok(DecoherenceMatrix { entries, homogeneous })
}

/// `Tr(C ρ C†)`.
pub fn branch_probability(rho: &DensityMatrix, op: &ClassOperator) -> f64 {
    (op.matrix() * rho.matrix() * op.matrix().adjoint()).trace().re
}

/// Normalised branch state `ρ_c = C_p ρ C_p† / Tr(C_p ρ C_p†)`.
pub fn current_density_matrix(set: &HistorySet, past: &ClassOperator) -> Result<DensityMatrix> {
    let rho = set.initial.density();
    if past.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "past class operator".into(),
            expected: rho.dim(),
            found: past.dim(),
        });
    }
    let branch = past.matrix() * rho.matrix() * past.matrix().adjoint();
    let probability = branch.trace().re;
    if probability <= NULL_TOL {
        return Err(Error::NullBranch { probability });
    }
    let mut rho_c = branch.unscale(probability);
    // Remove rounding asymmetry before validation.
    rho_c = (&rho_c + rho_c.adjoint()).unscale(2.0);
    DensityMatrix::new(rho_c)
}

/// Pure initial state from a normalised vector.
pub fn pure(psi: ComplexVector) -> InitialState {
    InitialState::Pure(psi)
}

/// Rank-one projector `|v⟩⟨v|` for a unit vector, as a raw class operator.
pub fn rank_one(v: &ComplexVector) -> ClassOperator {
    ClassOperator::raw(outer(v, v))
}
