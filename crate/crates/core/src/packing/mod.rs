//! Bounds for the generalized kissing problem: how many unit vectors fit on
//! a sphere when every pairwise overlap is at most `ε`.

pub mod jacobi;

use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use jacobi::jacobi_tilde_all;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    /// Unit sphere in `R^k`.
    RealSphere(usize),
    /// Unit sphere in `C^d`.
    ComplexSphere(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overlap {
    /// `|Re(u†v)| ≤ ε`.
    RePart,
    /// `|u†v| ≤ ε`.
    Modulus,
}

impl Overlap {
    pub fn name(self) -> &'static str {
        match self {
            Overlap::RePart => "re-part",
            Overlap::Modulus => "modulus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundQuery {
    pub space: Space,
    pub overlap: Overlap,
    pub epsilon: f64,
}

impl BoundQuery {
    pub fn new(space: Space, overlap: Overlap, epsilon: f64) -> Result<Self> {
        let dim = match space {
            Space::RealSphere(k) => k,
            Space::ComplexSphere(d) => d,
        };
        if dim < 2 {
            return Err(Error::out_of_range("dimension", dim as f64, "dimension >= 2"));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::out_of_range("epsilon", epsilon, "0 <= epsilon < 1"));
        }
        Ok(BoundQuery { space, overlap, epsilon })
    }

    pub fn complex(d: usize, overlap: Overlap, epsilon: f64) -> Result<Self> {
        Self::new(Space::ComplexSphere(d), overlap, epsilon)
    }

    /// Real dimension `k` and overlap-sensitivity of the equivalent line
    /// packing: the real-part condition on `C^d` is a line packing in `R^{2d}`.
    fn line_dimension(&self) -> LineForm {
        match (self.space, self.overlap) {
            (Space::RealSphere(k), _) => LineForm::Real(k),
            (Space::ComplexSphere(d), Overlap::RePart) => LineForm::Real(2 * d),
            (Space::ComplexSphere(d), Overlap::Modulus) => LineForm::Complex(d),
        }
    }
}

enum LineForm {
    Real(usize),
    Complex(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperBound {
    /// Integer bound, `None` when the closed form has a non-positive denominator.
    pub value: Option<u64>,
    pub raw: f64,
    /// `false` outside the region where the closed form is proven.
    pub valid: bool,
}

/// Floor that absorbs rounding when the exact value is an integer.
fn snapped_floor(x: f64) -> u64 {
    (x + 1e-9 * x.abs().max(1.0)).floor() as u64
}

// `ε² ≤ 1/m`, allowing for `ε` having been rounded through a square root.
fn within(e2: f64, m: usize) -> bool {
    e2 <= (1.0 + 1e-12) / m as f64
}

/// Degree-one linear-programming bound:
/// `⌊2d(1−ε²)/(1−2dε²)⌋` for the real-part overlap on `C^d`,
/// `⌊d(1−ε²)/(1−dε²)⌋` for the modulus overlap, and
/// `⌊k(1−ε²)/(1−kε²)⌋` on the real sphere in `R^k`.
pub fn upper_bound(q: &BoundQuery) -> Result<UpperBound> {
    let e2 = q.epsilon * q.epsilon;
    if q.epsilon >= 1.0 {
        return Err(Error::out_of_range("epsilon", q.epsilon, "epsilon < 1"));
    }
    let (m, valid) = match (q.space, q.overlap) {
        (Space::ComplexSphere(d), Overlap::RePart) => (2 * d, d >= 3 && within(e2, 2 * d + 2)),
        (Space::ComplexSphere(d), Overlap::Modulus) => (d, d >= 2 && within(e2, d + 1)),
        (Space::RealSphere(k), _) => (k, k >= 5 && within(e2, k + 2)),
    };
    let mf = m as f64;
    let denominator = 1.0 - mf * e2;
    if denominator <= 0.0 {
        return Ok(UpperBound {
            value: None,
            raw: f64::INFINITY,
            valid: false,
        });
    }
    let raw = mf * (1.0 - e2) / denominator;
    Ok(UpperBound {
        value: Some(snapped_floor(raw)),
        raw,
        valid,
    })
}

/// Covering-argument lower bound: `(1−ε²)^{1/2−d}` for the real-part
/// overlap, `(1−ε²)^{1−d}` for the modulus overlap, `(1−ε²)^{(1−k)/2}` on `R^k`.
pub fn shannon_lower_bound(q: &BoundQuery) -> f64 {
    let base = 1.0 - q.epsilon * q.epsilon;
    let exponent = match q.line_dimension() {
        LineForm::Real(k) => (1.0 - k as f64) / 2.0,
        LineForm::Complex(d) => 1.0 - d as f64,
    };
    base.powf(exponent)
}

/// `ε` at which the real-part lower bound drops to the trivial `2d`, and the
/// large-`d` expansion `[2 ln(2d)/(2d−1)]^{1/2}`.
pub fn shannon_crossover(d: usize) -> (f64, f64) {
    let m = 2.0 * d as f64;
    let exact = (1.0 - m.powf(2.0 / (1.0 - m))).sqrt();
    let expansion = (2.0 * m.ln() / (m - 1.0)).sqrt();
    (exact, expansion)
}

/// Surface area of the sphere of radius `r` in `R^d`: `d r^{d−1} π^{d/2} / Γ((d+2)/2)`.
pub fn sphere_area(d: usize, r: f64) -> f64 {
    let df = d as f64;
    (df.ln() + (df - 1.0) * r.ln() + 0.5 * df * std::f64::consts::PI.ln() - ln_gamma((df + 2.0) / 2.0)).exp()
}

fn check_cap_args(d: usize, r: f64, theta: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::out_of_range("d", d as f64, "d >= 2"));
    }
    if !(r > 0.0) {
        return Err(Error::out_of_range("r", r, "r > 0"));
    }
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2 + 1e-15) {
        return Err(Error::out_of_range("theta", theta, "0 < theta <= pi/2"));
    }
    Ok(())
}

pub const QUADRATURE_TOL: f64 = 1e-10;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Area of the cap of angular radius `θ` on the sphere of radius `r` in `R^d`:
/// `S_{d−1}(1) r^{d−1} ∫_0^θ sin^{d−2}φ dφ`, the integral by quadrature.
pub fn cap_area(d: usize, r: f64, theta: f64) -> Result<f64> {
    check_cap_args(d, r, theta)?;
    let df = d as f64;
    let prefactor = (df - 1.0) * std::f64::consts::PI.powf((df - 1.0) / 2.0) / gamma((df + 1.0) / 2.0) * r.powf(df - 1.0);
    let integral = adaptive_simpson(&|phi: f64| phi.sin().powi(d as i32 - 2), 0.0, theta, QUADRATURE_TOL / prefactor.max(1.0));
    Ok(prefactor * integral)
}

/// Area of `{v ∈ C^d : ‖v‖ = r, |u†v| ≥ r cos θ}`: `S_{2d}(r) sin^{2d−2}θ`.
pub fn complex_cap_area(d: usize, r: f64, theta: f64) -> Result<f64> {
    check_cap_args(d, r, theta)?;
    Ok(sphere_area(2 * d, r) * theta.sin().powi(2 * d as i32 - 2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpCheck {
    pub d: usize,
    pub epsilon: f64,
    pub overlap: Overlap,
    /// Upper end `s = 2ε² − 1` of the constrained interval.
    pub s: f64,
    pub f1: f64,
    pub objective: f64,
    pub closed_form: f64,
    pub feasible: bool,
    /// Grid point where `f₁ P̃₁(t)` is largest, and that value (must be ≤ −1).
    pub worst_t: f64,
    pub worst_value: f64,
    pub max_degree: usize,
    /// First `(degree, t)` where `P̃_i(t) < P̃_1(t)` on the grid.
    pub higher_degree_violation: Option<(usize, f64)>,
}

impl LpCheck {
    pub fn holds(&self) -> bool {
        self.feasible && self.higher_degree_violation.is_none() && (self.objective - self.closed_form).abs() <= 1e-9 * self.closed_form
    }
}

/// Checks that the degree-one candidate `f₁ = −1/P̃₁(s)` is feasible for the
/// Delsarte linear program on `C^d`, that its objective `1 + f₁` equals the
/// closed-form bound, and that no single higher-degree polynomial lies below
/// `P̃₁` on `[−1, s]`.
pub fn lp_optimality_check(d: usize, epsilon: f64, overlap: Overlap, max_degree: usize, grid: usize) -> Result<LpCheck> {
    BoundQuery::complex(d, overlap, epsilon)?;
    let e2 = epsilon * epsilon;
    let (alpha, beta, m) = match overlap {
        Overlap::RePart => (d as f64 - 1.5, -0.5, 2 * d),
        Overlap::Modulus => (d as f64 - 2.0, 0.0, d),
    };
    let limit = match overlap {
        Overlap::RePart => 1.0 / (2 * d + 2) as f64,
        Overlap::Modulus => 1.0 / (d + 1) as f64,
    };
    if e2 > limit * (1.0 + 1e-12) || alpha <= -1.0 {
        return Err(Error::out_of_range("epsilon", epsilon, format!("epsilon^2 <= {limit}")));
    }
    let s = 2.0 * e2 - 1.0;
    let p1_s = jacobi_tilde_all(alpha, beta, 1, s)[1];
    let f1 = -1.0 / p1_s;
    let objective = 1.0 + f1;
    let mf = m as f64;
    let closed_form = mf * (1.0 - e2) / (1.0 - mf * e2);

    let points = grid.max(2);
    let ts: Vec<f64> = (0..points).map(|i| -1.0 + (s + 1.0) * i as f64 / (points - 1) as f64).collect();
    let mut worst_t = -1.0;
    let mut worst_value = f64::NEG_INFINITY;
    let mut higher_degree_violation = None;
    for &t in &ts {
        let tilde = jacobi_tilde_all(alpha, beta, max_degree.max(1), t);
        let value = f1 * tilde[1];
        if value > worst_value {
            worst_value = value;
            worst_t = t;
        }
        if higher_degree_violation.is_none() {
            // Equality at the interval end is the boundary root of P̃₂ − P̃₁.
            if let Some(i) = (2..=max_degree).find(|&i| tilde[i] < tilde[1] - 1e-12) {
                higher_degree_violation = Some((i, t));
            }
        }
    }
    Ok(LpCheck {
        d,
        epsilon,
        overlap,
        s,
        f1,
        objective,
        closed_form,
        feasible: worst_value <= -1.0 + 1e-12,
        worst_t,
        worst_value,
        max_degree,
        higher_degree_violation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub space: &'static str,
    pub d: usize,
    pub epsilon: f64,
    pub lower: f64,
    pub upper: Option<u64>,
    pub valid: bool,
}

/// Lower and upper bounds on `C^d` for every `(d, ε)` pair and overlap kind.
pub fn bound_table(ds: &[usize], epsilons: &[f64], overlaps: &[Overlap]) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::with_capacity(ds.len() * epsilons.len() * overlaps.len());
    for &overlap in overlaps {
        for &d in ds {
            for &epsilon in epsilons {
                let q = BoundQuery::complex(d, overlap, epsilon)?;
                let upper = upper_bound(&q)?;
                rows.push(BoundRow {
                    space: overlap.name(),
                    d,
                    epsilon,
                    lower: shannon_lower_bound(&q),
                    upper: upper.value,
                    valid: upper.valid,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn re(d: usize, e: f64) -> BoundQuery {
        BoundQuery::complex(d, Overlap::RePart, e).unwrap()
    }

    #[test]
    fn reference_upper_bounds() {
        assert_eq!(upper_bound(&re(3, 0.1)).unwrap().value, Some(6));
        assert_eq!(upper_bound(&re(3, 1.0 / 6.0)).unwrap().value, Some(7));
        assert_eq!(upper_bound(&re(3, 0.0)).unwrap().value, Some(6));
        let m = BoundQuery::complex(5, Overlap::Modulus, 0.0).unwrap();
        assert_eq!(upper_bound(&m).unwrap().value, Some(5));
    }

    #[test]
    fn upper_bound_validity_and_errors() {
        assert!(!upper_bound(&re(3, 0.4)).unwrap().valid);
        assert!(!upper_bound(&re(2, 0.01)).unwrap().valid);
        assert_eq!(upper_bound(&re(3, 0.5)).unwrap().value, None);
        assert!(BoundQuery::complex(3, Overlap::RePart, 1.0).is_err());
        let m = BoundQuery::complex(2, Overlap::Modulus, 0.5).unwrap();
        assert!(upper_bound(&m).unwrap().valid);
    }

    #[test]
    fn shannon_values() {
        assert_eq!(shannon_lower_bound(&re(4, 0.0)), 1.0);
        assert_relative_eq!(shannon_lower_bound(&re(10, 0.5)), 0.75f64.powf(-9.5), max_relative = 1e-14);
        let ratio = shannon_lower_bound(&re(20, 0.3)) / shannon_lower_bound(&re(10, 0.3));
        assert_relative_eq!(ratio, 0.91f64.powi(-10), max_relative = 1e-12);
        let m = BoundQuery::complex(4, Overlap::Modulus, 0.5).unwrap();
        assert_relative_eq!(shannon_lower_bound(&m), 0.75f64.powi(-3), max_relative = 1e-14);
    }

    #[test]
    fn areas() {
        assert_relative_eq!(sphere_area(3, 1.0), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(2, 2.0), 4.0 * PI, max_relative = 1e-14);
        for &t in &[0.1, 0.7, 1.2] {
            assert_abs_diff_eq!(cap_area(3, 1.0, t).unwrap(), 2.0 * PI * (1.0 - f64::cos(t)), epsilon = 1e-10);
        }
        for d in 2..9 {
            assert_relative_eq!(cap_area(d, 1.3, PI / 2.0).unwrap(), 0.5 * sphere_area(d, 1.3), max_relative = 1e-10);
        }
        assert!(cap_area(1, 1.0, 0.5).is_err());
        assert!(cap_area(3, 1.0, 2.0).is_err());
    }

    #[test]
    fn complex_cap_matches_measure_integral() {
        // The overlap |u†v|² of a uniform unit vector has density (d−1)(1−t)^{d−2}.
        for d in 2..7 {
            for &theta in &[0.3, 0.9, 1.4] {
                let c2 = f64::cos(theta).powi(2);
                let fraction = adaptive_simpson(&|t: f64| (d as f64 - 1.0) * (1.0 - t).powi(d as i32 - 2), c2, 1.0, 1e-13);
                assert_relative_eq!(
                    complex_cap_area(d, 1.0, theta).unwrap(),
                    fraction * sphere_area(2 * d, 1.0),
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn lp_candidate_examples() {
        let c = lp_optimality_check(3, 0.2, Overlap::RePart, 20, 500).unwrap();
        assert!(c.holds(), "{c:?}");
        assert_relative_eq!(c.objective, 6.0 * 0.96 / 0.76, max_relative = 1e-12);
        let c = lp_optimality_check(3, 0.0, Overlap::RePart, 20, 10).unwrap();
        assert_relative_eq!(c.objective, 6.0, max_relative = 1e-12);
        let c = lp_optimality_check(4, 0.3, Overlap::Modulus, 20, 500).unwrap();
        assert!(c.holds(), "{c:?}");
        assert_relative_eq!(c.objective, 4.0 * 0.91 / 0.64, max_relative = 1e-12);
        assert!(lp_optimality_check(3, 0.4, Overlap::RePart, 5, 10).is_err());
    }

    #[test]
    fn crossover_expansion_accuracy() {
        for d in 5..=50 {
            let (exact, expansion) = shannon_crossover(d);
            let scale = ((d as f64).ln() / d as f64).powf(1.5);
            assert!((exact - expansion).abs() <= scale, "d = {d}");
        }
    }
}
