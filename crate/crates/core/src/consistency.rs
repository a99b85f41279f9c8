//! Exact and approximate consistency criteria on a decoherence matrix.
//!
//! Every criterion reports the smallest tolerance at which it would pass
//! (`achieved_epsilon`) together with the pair of histories attaining it.
//! Pairs are scanned in lexicographic order and the first maximum is kept.
//!
//! Gell-Mann and Hartle's stronger-than-medium conditions are not provided.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histories::{
    current_density_matrix, decoherence_from_density, ClassOperator, DecoherenceMatrix, HistorySet, NULL_TOL,
};
use crate::linalg::{real_embed, ComplexVector};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NullPolicy {
    /// Pairs with a null member satisfy the criterion vacuously.
    #[default]
    Skip,
    /// Any pair with a null member fails the criterion.
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    Weak,
    Medium,
    Threshold,
    Dhc,
    MediumDhc,
    ConditionalDhc,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::Weak,
        Criterion::Medium,
        Criterion::Threshold,
        Criterion::Dhc,
        Criterion::MediumDhc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Weak => "weak",
            Criterion::Medium => "medium",
            Criterion::Threshold => "threshold",
            Criterion::Dhc => "dhc",
            Criterion::MediumDhc => "medium-dhc",
            Criterion::ConditionalDhc => "conditional-dhc",
        }
    }

    pub fn parse(s: &str) -> Option<Criterion> {
        Criterion::ALL
            .into_iter()
            .chain([Criterion::ConditionalDhc])
            .find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionParams {
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub treat_null: NullPolicy,
}

impl CriterionParams {
    pub fn new(epsilon: f64) -> Self {
        CriterionParams {
            epsilon,
            delta: None,
            treat_null: NullPolicy::Skip,
        }
    }
}

/// Result of one criterion. `achieved_epsilon` is `+∞` when no tolerance
/// can make the criterion pass (null pairs under [`NullPolicy::Fail`]).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub criterion: Criterion,
    pub pass: bool,
    pub achieved_epsilon: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub params: CriterionParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub criteria: Vec<CriterionOutcome>,
    pub null_histories: Vec<usize>,
}

impl ConsistencyReport {
    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn get(&self, criterion: Criterion) -> Option<&CriterionOutcome> {
        self.criteria.iter().find(|c| c.criterion == criterion)
    }
}

fn scan_pairs(n: usize, mut value: impl FnMut(usize, usize) -> f64) -> (f64, Option<(usize, usize)>) {
    let mut best = 0.0;
    let mut pair = None;
    for a in 0..n {
        for b in (a + 1)..n {
            let v = value(a, b);
            if pair.is_none() || v > best {
                best = v;
                pair = Some((a, b));
            }
        }
    }
    (best, pair)
}

fn absolute(d: &DecoherenceMatrix, criterion: Criterion, tol: f64, modulus: bool) -> CriterionOutcome {
    let (achieved, worst_pair) = scan_pairs(d.n(), |a, b| {
        let z = d.get(a, b);
        if modulus {
            z.norm()
        } else {
            z.re.abs()
        }
    });
    CriterionOutcome {
        criterion,
        pass: achieved <= tol,
        achieved_epsilon: achieved,
        worst_pair,
        params: CriterionParams::new(tol),
    }
}

/// `|Re D_αβ| ≤ tol` for all `α ≠ β`.
pub fn weak_consistency(d: &DecoherenceMatrix, tol: f64) -> CriterionOutcome {
    absolute(d, Criterion::Weak, tol, false)
}

/// `|D_αβ| ≤ tol` for all `α ≠ β`.
pub fn medium_consistency(d: &DecoherenceMatrix, tol: f64) -> CriterionOutcome {
    absolute(d, Criterion::Medium, tol, true)
}

/// The absolute off-diagonal bound `|D_αβ| ≤ ε`. It does not bound the
/// probability violation: see [`crate::generators::theorem6_witness`].
pub fn threshold_criterion(d: &DecoherenceMatrix, epsilon: f64) -> CriterionOutcome {
    let mut out = absolute(d, Criterion::Threshold, epsilon, true);
    out.criterion = Criterion::Threshold;
    out
}

fn relative(
    d: &DecoherenceMatrix,
    criterion: Criterion,
    epsilon: f64,
    treat_null: NullPolicy,
    modulus: bool,
) -> Result<CriterionOutcome> {
    let p = d.probabilities();
    let n = p.len();
    let null: Vec<bool> = p.iter().map(|&x| x <= NULL_TOL).collect();
    if null.iter().all(|&b| b) {
        return Err(Error::AllNull);
    }
    let params = CriterionParams {
        epsilon,
        delta: None,
        treat_null,
    };
    if treat_null == NullPolicy::Fail {
        let first_null_pair = (0..n)
            .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
            .find(|&(a, b)| null[a] || null[b]);
        if let Some(pair) = first_null_pair {
            return Ok(CriterionOutcome {
                criterion,
                pass: false,
                achieved_epsilon: f64::INFINITY,
                worst_pair: Some(pair),
                params,
            });
        }
    }
    let mut achieved = 0.0;
    let mut worst_pair = None;
    for a in 0..n {
        if null[a] {
            continue;
        }
        for b in (a + 1)..n {
            if null[b] {
                continue;
            }
            let z = d.get(a, b);
            let num = if modulus { z.norm() } else { z.re.abs() };
            let ratio = num / (p[a] * p[b]).sqrt();
            if worst_pair.is_none() || ratio > achieved {
                achieved = ratio;
                worst_pair = Some((a, b));
            }
        }
    }
    Ok(CriterionOutcome {
        criterion,
        pass: achieved <= epsilon,
        achieved_epsilon: achieved,
        worst_pair,
        params,
    })
}

/// Dowker-Halliwell criterion `|Re D_αβ| ≤ ε (D_αα D_ββ)^{1/2}`.
pub fn dhc(d: &DecoherenceMatrix, epsilon: f64, treat_null: NullPolicy) -> Result<CriterionOutcome> {
    relative(d, Criterion::Dhc, epsilon, treat_null, false)
}

/// Medium form `|D_αβ| ≤ ε (D_αα D_ββ)^{1/2}`: a bound on the
/// distinguishability `|u_α† u_β| / (‖u_α‖ ‖u_β‖)`.
pub fn medium_dhc(d: &DecoherenceMatrix, epsilon: f64, treat_null: NullPolicy) -> Result<CriterionOutcome> {
    relative(d, Criterion::MediumDhc, epsilon, treat_null, true)
}

/// Symmetric matrix of pairwise values with `None` where a member is null.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMatrix {
    n: usize,
    entries: Vec<Option<f64>>,
}

impl PairMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        self.entries[a * self.n + b]
    }
}

/// `|Re D_αβ| / (D_αα D_ββ)^{1/2}` for every pair.
pub fn dhc_ratio_matrix(d: &DecoherenceMatrix) -> PairMatrix {
    let p = d.probabilities();
    let n = p.len();
    let entries = (0..n * n)
        .map(|k| {
            let (a, b) = (k / n, k % n);
            if p[a] <= NULL_TOL || p[b] <= NULL_TOL {
                None
            } else {
                Some(d.get(a, b).re.abs() / (p[a] * p[b]).sqrt())
            }
        })
        .collect();
    PairMatrix { n, entries }
}

/// `|cos θ_αβ|` between the real embeddings of history states.
pub fn angle_form(states: &[ComplexVector]) -> PairMatrix {
    let real: Vec<_> = states.iter().map(real_embed).collect();
    let norms: Vec<f64> = real.iter().map(|v| v.norm()).collect();
    let n = states.len();
    let entries = (0..n * n)
        .map(|k| {
            let (a, b) = (k / n, k % n);
            if norms[a] * norms[a] <= NULL_TOL || norms[b] * norms[b] <= NULL_TOL {
                None
            } else {
                Some(real[a].dot(&real[b]).abs() / (norms[a] * norms[b]))
            }
        })
        .collect();
    PairMatrix { n, entries }
}

/// DHC on the future histories given a realised past, evaluated on the
/// current density matrix `ρ_c`.
pub fn conditional_dhc(
    set: &HistorySet,
    past: &ClassOperator,
    futures: &[ClassOperator],
    epsilon: f64,
) -> Result<CriterionOutcome> {
    let rho_c = current_density_matrix(set, past)?;
    let d = decoherence_from_density(&rho_c, futures, false);
    let mut out = dhc(&d, epsilon, NullPolicy::Skip)?;
    out.criterion = Criterion::ConditionalDhc;
    Ok(out)
}

/// The same condition evaluated on the joint operators `C_f C_p` with the
/// original initial state.
pub fn joint_branch_dhc(
    set: &HistorySet,
    past: &ClassOperator,
    futures: &[ClassOperator],
    epsilon: f64,
) -> Result<CriterionOutcome> {
    let rho = set.initial().density();
    let probability = crate::histories::branch_probability(&rho, past);
    if probability <= NULL_TOL {
        return Err(Error::NullBranch { probability });
    }
    let joint: Vec<ClassOperator> = futures.iter().map(|f| f.after(past)).collect();
    let d = decoherence_from_density(&rho, &joint, false);
    let mut out = dhc(&d, epsilon, NullPolicy::Skip)?;
    out.criterion = Criterion::ConditionalDhc;
    Ok(out)
}

/// Runs the selected criteria. Absolute criteria use `params.epsilon` as
/// their tolerance.
pub fn evaluate(d: &DecoherenceMatrix, criteria: &[Criterion], params: CriterionParams) -> Result<ConsistencyReport> {
    evaluate_with(d, criteria, |_| params)
}

/// Runs the selected criteria with a per-criterion parameter choice.
pub fn evaluate_with(
    d: &DecoherenceMatrix,
    criteria: &[Criterion],
    params_for: impl Fn(Criterion) -> CriterionParams,
) -> Result<ConsistencyReport> {
    let mut out = Vec::with_capacity(criteria.len());
    for &c in criteria {
        let params = params_for(c);
        let mut outcome = match c {
            Criterion::Weak => weak_consistency(d, params.epsilon),
            Criterion::Medium => medium_consistency(d, params.epsilon),
            Criterion::Threshold => threshold_criterion(d, params.epsilon),
            Criterion::Dhc => dhc(d, params.epsilon, params.treat_null)?,
            Criterion::MediumDhc => medium_dhc(d, params.epsilon, params.treat_null)?,
            Criterion::ConditionalDhc => {
                return Err(Error::Input(
                    "conditional-dhc needs a past branch; call conditional_dhc directly".into(),
                ))
            }
        };
        outcome.params = params;
        out.push(outcome);
    }
    Ok(ConsistencyReport {
        criteria: out,
        null_histories: d.null_histories(),
    })
}
