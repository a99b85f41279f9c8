//! Maximum probability violation: exact subset search and closed-form bounds.
//!
//! The violation of a collected subset `S` is `|Σ_{α≠β∈S} D_αβ|`, the change
//! in probability when the histories of `S` are merged into one. The exact
//! search visits every subset in Gray-code order so each step adds or removes
//! one history and updates the running sum in `O(n)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{zeno_closed_form, ZenoParams, ZENO_EXPLICIT_MAX};
use crate::histories::DecoherenceMatrix;

/// Largest history count accepted by [`mpv_exact`].
pub const EXACT_MAX: usize = 24;
/// Violations closer than this are treated as ties.
pub const TIE_TOL: f64 = 1e-12;

// Fixed number of leading histories enumerated outside the Gray-code walk.
// The split, and therefore every floating-point sum, does not depend on the
// number of worker threads.
const SPLIT_BITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MpvMethod {
    Exact,
    /// Closed-form bound; the value is not attained by a known subset.
    Bound { name: String },
    /// Best of the two sign classes of a Zeno family.
    ZenoGrouped { class: SignClass },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignClass {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MpvResult {
    pub value: f64,
    #[serde(rename = "maximizer_indices")]
    pub maximizer: Vec<usize>,
    pub method: MpvMethod,
}

#[derive(Clone, Copy)]
struct Candidate {
    value: f64,
    mask: u64,
}

impl Candidate {
    // Larger violation wins; near-ties go to the smaller subset, then to the
    // lexicographically smaller sorted index list.
    fn beats(&self, other: &Candidate) -> bool {
        if (self.value - other.value).abs() > TIE_TOL {
            return self.value > other.value;
        }
        let (sa, sb) = (self.mask.count_ones(), other.mask.count_ones());
        if sa != sb {
            return sa < sb;
        }
        let diff = self.mask ^ other.mask;
        diff != 0 && (self.mask & (diff & diff.wrapping_neg())) != 0
    }
}

fn mask_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask & (1u64 << i) != 0).collect()
}

/// Exact maximum of `|Σ_{α≠β∈S} D_αβ|` over all subsets `S`.
pub fn mpv_exact(d: &DecoherenceMatrix) -> Result<MpvResult> {
    let n = d.n();
    if n > EXACT_MAX {
        return Err(Error::TooManyHistories { n, max: EXACT_MAX });
    }
    // Off-diagonal real parts; the subset sum is 2 Σ_{α<β} Re D_αβ.
    let re: Vec<f64> = (0..n * n)
        .map(|k| if k / n == k % n { 0.0 } else { d.get(k / n, k % n).re })
        .collect();

    let high = SPLIT_BITS.min(n);
    let low = n - high;
    let best = (0..(1u64 << high))
        .into_par_iter()
        .map(|prefix| search_block(&re, n, low, prefix << low))
        .reduce(
            || Candidate { value: 0.0, mask: 0 },
            |a, b| if b.beats(&a) { b } else { a },
        );

    let maximizer = mask_indices(best.mask);
    let value = d.subset_violation(&maximizer).abs();
    Ok(MpvResult {
        value,
        maximizer,
        method: MpvMethod::Exact,
    })
}

// Gray-code walk over the low `low` bits with the high bits fixed to `base`.
// History `i` occupies bit `i` of the mask.
fn search_block(re: &[f64], n: usize, low: usize, base: u64) -> Candidate {
    let mut in_set = vec![false; n];
    for (i, slot) in in_set.iter_mut().enumerate() {
        *slot = base & (1u64 << i) != 0;
    }
    // link[k] = Σ_{j∈S} Re D_kj
    let mut link = vec![0.0; n];
    for (k, l) in link.iter_mut().enumerate() {
        *l = (0..n).filter(|&j| in_set[j]).map(|j| re[k * n + j]).sum();
    }
    let mut sum: f64 = (0..n).filter(|&k| in_set[k]).map(|k| link[k]).sum();

    let mut mask = base;
    let mut best = Candidate {
        value: sum.abs(),
        mask,
    };
    for step in 1u64..(1u64 << low) {
        let k = step.trailing_zeros() as usize;
        let sign = if in_set[k] { -1.0 } else { 1.0 };
        sum += sign * 2.0 * link[k];
        in_set[k] = !in_set[k];
        mask ^= 1u64 << k;
        let row = &re[k * n..(k + 1) * n];
        for (l, &r) in link.iter_mut().zip(row) {
            *l += sign * r;
        }
        let cand = Candidate {
            value: sum.abs(),
            mask,
        };
        if cand.beats(&best) {
            best = cand;
        }
    }
    best
}

/// `Σ_{α≠β} |Re D_αβ|`, halved when the matrix is flagged homogeneous.
pub fn bound_sum_abs(d: &DecoherenceMatrix) -> MpvResult {
    let n = d.n();
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                s += d.get(a, b).re.abs();
            }
        }
    }
    let (value, name) = if d.is_homogeneous() {
        (0.5 * s, "half-sum-abs")
    } else {
        (s, "sum-abs")
    };
    MpvResult {
        value,
        maximizer: Vec::new(),
        method: MpvMethod::Bound { name: name.into() },
    }
}

/// Violation of the X (positive-sign) and Y (negative-sign) collections of
/// the Zeno family, computed from binomially grouped classes.
pub fn mpv_grouped_zeno(n: usize, epsilon: f64) -> Result<MpvResult> {
    let z = zeno_closed_form(&ZenoParams::new(n, epsilon)?);
    let (value, class) = if z.x_violation.abs() >= z.y_violation.abs() {
        (z.x_violation.abs(), SignClass::X)
    } else {
        (z.y_violation.abs(), SignClass::Y)
    };
    let maximizer = if n <= ZENO_EXPLICIT_MAX {
        crate::generators::zeno_class_members(n, class)
    } else {
        Vec::new()
    };
    Ok(MpvResult {
        value,
        maximizer,
        method: MpvMethod::ZenoGrouped { class },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsVariant {
    /// `δ / (n(n-1))` for `n` histories.
    Naive { histories: usize },
    /// Exact sum-rule selection for homogeneous histories.
    An1,
    /// Exact selection for general class operators.
    An2,
    /// `δ / (2d)`.
    EpsChoice,
    /// `δ / d`, valid when the medium DHC holds or the operators are homogeneous.
    HomogeneousOrMedium,
    /// `2δ / d`, valid when both hold.
    HomogeneousAndMedium,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonChoice {
    pub epsilon: f64,
    pub warning: Option<String>,
}

/// DHC scale `ε(δ)` guaranteeing a probability violation of at most `δ`
/// (to the order stated for each variant) in dimension `d`.
pub fn eps_for_delta(delta: f64, d: usize, variant: EpsVariant) -> Result<EpsilonChoice> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::out_of_range("delta", delta, "delta > 0"));
    }
    if d == 0 {
        return Err(Error::out_of_range("d", 0.0, "d >= 1"));
    }
    let df = d as f64;
    let epsilon = match variant {
        EpsVariant::Naive { histories } => {
            if histories < 2 {
                return Err(Error::out_of_range("histories", histories as f64, "n >= 2"));
            }
            let n = histories as f64;
            delta / (n * (n - 1.0))
        }
        EpsVariant::An1 => {
            let k = 2.0 * df - 1.0;
            // Rationalised root of 2dδ ε² + (2d-1) ε - δ = 0.
            2.0 * delta / (k + (k * k + 8.0 * df * delta * delta).sqrt())
        }
        EpsVariant::An2 => {
            let k = (2.0 * df - 1.0) * (1.0 + delta);
            2.0 * delta / (k + (k * k + 8.0 * df * delta * delta).sqrt())
        }
        EpsVariant::EpsChoice => delta / (2.0 * df),
        EpsVariant::HomogeneousOrMedium => delta / df,
        EpsVariant::HomogeneousAndMedium => 2.0 * delta / df,
    };
    let warning = match variant {
        EpsVariant::EpsChoice | EpsVariant::HomogeneousOrMedium | EpsVariant::HomogeneousAndMedium
            if delta >= 1.0 =>
        {
            Some(format!("delta = {delta} >= 1: the simplified selection assumes delta < 1"))
        }
        _ => None,
    };
    Ok(EpsilonChoice { epsilon, warning })
}

/// Bound on `|Σ_{α≠β∈S} D_αβ|` for a set satisfying the DHC at `ε` in
/// dimension `d`. For homogeneous sets the value is relative to
/// `Σ_{α∈S} D_αα`; for general class operators it is absolute.
pub fn dh_sum_bound(epsilon: f64, d: usize, homogeneous: bool) -> Result<f64> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::out_of_range("epsilon", epsilon, "epsilon >= 0"));
    }
    let df = d as f64;
    if homogeneous {
        let den = 1.0 - 2.0 * df * epsilon * epsilon;
        if den <= 0.0 {
            return Err(Error::out_of_range("epsilon", epsilon, "epsilon^2 < 1/(2d)"));
        }
        Ok(epsilon * (2.0 * df - 1.0) / den)
    } else {
        let den = 1.0 + epsilon - 2.0 * df * epsilon * (1.0 + epsilon);
        if den <= 0.0 {
            return Err(Error::out_of_range("epsilon", epsilon, "1 + eps - 2 d eps (1 + eps) > 0"));
        }
        Ok(epsilon * (2.0 * df - 1.0) / den)
    }
}

/// Bound `Σ_α D_αα ≤ 1 / (1 - (n-1) ε)` on the total diagonal weight of `n`
/// general histories satisfying the DHC at `ε`.
pub fn diagonal_sum_bound(epsilon: f64, histories: usize) -> Result<f64> {
    let k = histories.saturating_sub(1) as f64;
    let den = 1.0 - k * epsilon;
    if !(epsilon >= 0.0) || den <= 0.0 {
        return Err(Error::out_of_range("epsilon", epsilon, "(n-1) epsilon < 1"));
    }
    Ok(1.0 / den)
}
