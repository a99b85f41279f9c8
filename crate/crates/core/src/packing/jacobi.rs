//! Jacobi polynomials and numerical checks of the inequalities that make the
//! degree-one linear-programming bound optimal.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiParams {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64, n: usize) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(Error::out_of_range("alpha", alpha, "alpha > -1"));
        }
        if !(beta > -1.0) {
            return Err(Error::out_of_range("beta", beta, "beta > -1"));
        }
        Ok(JacobiParams { alpha, beta, n })
    }
}

/// Rising factorial `(a)_n = a(a+1)…(a+n−1)`.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).map(|k| a + k as f64).product()
}

/// `P_n^{(α,β)}(1) = (α+1)_n / n!`.
pub fn jacobi_at_one(alpha: f64, n: usize) -> f64 {
    (1..=n).map(|k| (alpha + k as f64) / k as f64).product()
}

/// `P_0(x), …, P_{n_max}(x)` by the three-term recurrence in degree.
pub fn jacobi_all(alpha: f64, beta: f64, n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push((alpha + 1.0) + (alpha + beta + 2.0) * (x - 1.0) / 2.0);
    let ab = alpha + beta;
    for n in 2..=n_max {
        let nf = n as f64;
        let c = 2.0 * nf + ab;
        let a1 = 2.0 * nf * (nf + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (c * (c - 2.0) * x + alpha * alpha - beta * beta);
        let a3 = 2.0 * (nf + alpha - 1.0) * (nf + beta - 1.0) * c;
        let next = (a2 * out[n - 1] - a3 * out[n - 2]) / a1;
        out.push(next);
    }
    out
}

pub fn jacobi_eval(p: &JacobiParams, x: f64) -> f64 {
    jacobi_all(p.alpha, p.beta, p.n, x)[p.n]
}

/// `P_n(x) / P_n(1)`, exactly one at `x = 1`.
pub fn jacobi_tilde(p: &JacobiParams, x: f64) -> f64 {
    if x == 1.0 {
        return 1.0;
    }
    jacobi_eval(p, x) / jacobi_at_one(p.alpha, p.n)
}

/// `P̃_0, …, P̃_{n_max}` at `x`.
pub fn jacobi_tilde_all(alpha: f64, beta: f64, n_max: usize, x: f64) -> Vec<f64> {
    let mut v = jacobi_all(alpha, beta, n_max, x);
    for (n, value) in v.iter_mut().enumerate() {
        *value /= jacobi_at_one(alpha, n);
    }
    v
}

/// Distance kept from the open ends of a verification interval.
pub const ENDPOINT_GAP: f64 = 1e-6;
pub const DEFAULT_X_POINTS: usize = 2000;
pub const DEFAULT_N_MAX: usize = 40;

/// `start, start + step, …` up to and including `end`.
pub fn alpha_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let count = ((end - start) / step + 1e-9).floor() as usize;
    (0..=count).map(|k| start + k as f64 * step).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theorem {
    /// `β = −1/2`, real spheres.
    RealSphere,
    /// `β = 0`, complex spheres.
    ComplexSphere,
}

impl Theorem {
    pub fn beta(self) -> f64 {
        match self {
            Theorem::RealSphere => -0.5,
            Theorem::ComplexSphere => 0.0,
        }
    }

    pub fn min_alpha(self) -> f64 {
        match self {
            Theorem::RealSphere => 1.0,
            Theorem::ComplexSphere => 2.0,
        }
    }

    /// Right end of the interval on which `P̃_n > P̃_1` is claimed.
    pub fn boundary(self, alpha: f64) -> f64 {
        match self {
            Theorem::RealSphere => -(2.0 * alpha + 3.0) / (2.0 * alpha + 5.0),
            Theorem::ComplexSphere => -(alpha + 1.0) / (alpha + 3.0),
        }
    }

    pub fn default_alphas(self) -> Vec<f64> {
        alpha_grid(self.min_alpha(), 10.0, 0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub alpha: f64,
    pub n: usize,
    pub x: f64,
    /// Amount by which the claimed inequality fails (positive).
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub alphas: Vec<f64>,
    pub n_max: usize,
    pub x_points: usize,
    pub checks: usize,
    pub inequality_violations: Vec<Violation>,
    pub bound_violations: Vec<Violation>,
}

impl TheoremReport {
    pub fn violations(&self) -> usize {
        self.inequality_violations.len() + self.bound_violations.len()
    }
}

/// Uniform grid on `(−1, b)` approached within [`ENDPOINT_GAP`] of each end.
pub fn open_interval_grid(b: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = (-1.0 + ENDPOINT_GAP, b - ENDPOINT_GAP);
    if points <= 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// The bound used to prove the theorem for `n ≥ 4`, as `lhs ≤ rhs`.
fn envelope(theorem: Theorem, alpha: f64, x: f64, p_n: f64, p_n_at_minus_one: f64) -> (f64, f64) {
    match theorem {
        Theorem::RealSphere => (((1.0 - x) / 2.0).powf(alpha) * p_n.abs(), p_n_at_minus_one.abs()),
        Theorem::ComplexSphere => (((1.0 - x) / 2.0).powf(alpha / 2.0 + 0.25) * p_n.abs(), 1.0),
    }
}

fn verify(theorem: Theorem, alphas: &[f64], n_max: usize, x_points: usize) -> Result<TheoremReport> {
    let beta = theorem.beta();
    for &a in alphas {
        if a < theorem.min_alpha() {
            return Err(Error::out_of_range("alpha", a, format!("alpha >= {}", theorem.min_alpha())));
        }
    }
    if n_max < 2 {
        return Err(Error::out_of_range("n_max", n_max as f64, "n_max >= 2"));
    }
    let per_alpha: Vec<(usize, Vec<Violation>, Vec<Violation>)> = alphas
        .par_iter()
        .map(|&alpha| {
            let mut ineq = Vec::new();
            let mut bound = Vec::new();
            let mut checks = 0;
            let at_minus_one = jacobi_all(alpha, beta, n_max, -1.0);
            for x in open_interval_grid(theorem.boundary(alpha), x_points) {
                let raw = jacobi_all(alpha, beta, n_max, x);
                let first = raw[1] / jacobi_at_one(alpha, 1);
                for n in 2..=n_max {
                    checks += 1;
                    let diff = raw[n] / jacobi_at_one(alpha, n) - first;
                    if !(diff > 0.0) {
                        ineq.push(Violation { alpha, n, x, excess: -diff });
                    }
                    let (lhs, rhs) = envelope(theorem, alpha, x, raw[n], at_minus_one[n]);
                    if lhs > rhs * (1.0 + 1e-12) + 1e-15 {
                        bound.push(Violation { alpha, n, x, excess: lhs - rhs });
                    }
                }
            }
            (checks, ineq, bound)
        })
        .collect();
    let mut report = TheoremReport {
        theorem,
        alphas: alphas.to_vec(),
        n_max,
        x_points,
        checks: 0,
        inequality_violations: Vec::new(),
        bound_violations: Vec::new(),
    };
    for (checks, ineq, bound) in per_alpha {
        report.checks += checks;
        report.inequality_violations.extend(ineq);
        report.bound_violations.extend(bound);
    }
    Ok(report)
}

/// `P̃_n^{(α,−1/2)}(x) > P̃_1^{(α,−1/2)}(x)` on `(−1, −(2α+3)/(2α+5))`,
/// together with `((1−x)/2)^α |P_n(x)| ≤ |P_n(−1)|`.
pub fn verify_theorem3(alphas: &[f64], n_max: usize, x_points: usize) -> Result<TheoremReport> {
    verify(Theorem::RealSphere, alphas, n_max, x_points)
}

/// `P̃_n^{(α,0)}(x) > P̃_1^{(α,0)}(x)` on `(−1, −(α+1)/(α+3))`, together
/// with `[(1−x)/2]^{α/2+1/4} |P_n(x)| ≤ 1`.
pub fn verify_theorem4(alphas: &[f64], n_max: usize, x_points: usize) -> Result<TheoremReport> {
    verify(Theorem::ComplexSphere, alphas, n_max, x_points)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoninePolyaReport {
    pub alpha: f64,
    pub n: usize,
    /// Local maxima of `|w|` as `(s, |w(s)|)`, left to right, starting at `s = 0`.
    pub maxima: Vec<(f64, f64)>,
    pub non_increasing: bool,
    pub bounded_by_origin: bool,
    pub value_at_one: f64,
}

impl SoninePolyaReport {
    pub fn holds(&self) -> bool {
        self.non_increasing && self.bounded_by_origin && self.value_at_one == 0.0
    }
}

/// `w(s) = (1−s²)^α P_n^{(α,−1/2)}(2s²−1)` on `[0, 1]`: its local maxima in
/// modulus decrease and `|w(s)| ≤ |w(0)|`.
pub fn verify_sonine_polya(alpha: f64, n: usize, s_points: usize) -> Result<SoninePolyaReport> {
    if alpha < 1.0 {
        return Err(Error::out_of_range("alpha", alpha, "alpha >= 1"));
    }
    if n < 1 {
        return Err(Error::out_of_range("n", 0.0, "n >= 1"));
    }
    let points = s_points.max(3);
    let p = JacobiParams::new(alpha, -0.5, n)?;
    let w = |s: f64| (1.0 - s * s).powf(alpha) * jacobi_eval(&p, 2.0 * s * s - 1.0);
    let grid: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&s| w(s).abs()).collect();

    let mut maxima = vec![(0.0, values[0])];
    for i in 1..points - 1 {
        let rising = values[i] - values[i - 1];
        let falling = values[i + 1] - values[i];
        if rising > 0.0 && falling <= 0.0 {
            maxima.push((grid[i], values[i]));
        }
    }
    let tol = 1e-12 * values[0];
    let non_increasing = maxima.windows(2).all(|m| m[1].1 <= m[0].1 + tol);
    let bounded_by_origin = values.iter().all(|&v| v <= values[0] + tol);
    Ok(SoninePolyaReport {
        alpha,
        n,
        maxima,
        non_increasing,
        bounded_by_origin,
        value_at_one: w(1.0),
    })
}
