//! Distance functionals: how far is a candidate function from solving the
//! ODE?
//!
//! d1 is the L2 norm of the pointwise residual g·y'' + h; d2 integrates the
//! equation once more (ȳ'' = −h/g with the original boundary data) and
//! measures ‖y − ȳ‖; d_exact compares against a known solution; s_ratio is
//! the partial-sum norm quotient used to diagnose divergence of the
//! ε-series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{cheb_points, ChebFun};
use crate::linsolve::{solve_linear, LinearParams};
use crate::recurrence::{Expansion, ODEProblem};

/// Which distance drives an optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceKind {
    D1,
    D2,
}

impl std::fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistanceKind::D1 => write!(f, "d1"),
            DistanceKind::D2 => write!(f, "d2"),
        }
    }
}

/// Bundle of the distances computed for one candidate.
#[derive(Debug, Clone)]
pub struct DistanceReport {
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub d_ex: Option<f64>,
    /// The integrated comparator ȳ from d2, when computed.
    pub comparator: Option<ChebFun>,
}

/// Convergence verdict from the s_n/s_{n−2} quotients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Convergence {
    Convergent,
    Divergent { limit_ratio: f64 },
}

#[derive(Debug, Clone)]
pub struct SRatioReport {
    /// (n, s_n/s_{n−2}) for n = 2..order.
    pub ratios: Vec<(usize, f64)>,
    pub classification: Convergence,
}

/// Evaluates g and h along y at one point, honoring limit overrides.
struct ResidualEval<'a> {
    problem: &'a ODEProblem,
    y: &'a ChebFun,
    dy: ChebFun,
    ddy: ChebFun,
    override_tol: f64,
}

impl<'a> ResidualEval<'a> {
    fn new(problem: &'a ODEProblem, y: &'a ChebFun) -> Self {
        let dy = y.differentiate();
        let ddy = dy.differentiate();
        let (a, b) = problem.interval();
        Self {
            problem,
            y,
            dy,
            ddy,
            override_tol: 1e-12 * (1.0 + a.abs() + b.abs()),
        }
    }

    /// (g, h) at x along the candidate.
    fn g_h(&self, x: f64) -> Result<(f64, f64)> {
        let yv = self.y.eval_clamped(x);
        let dyv = self.dy.eval_clamped(x);
        let ov = self
            .problem
            .limit_overrides
            .iter()
            .find(|o| (o.x - x).abs() <= self.override_tol);
        let mut params = self.problem.params.clone();
        if ov.is_some() {
            params.insert("ddy".to_string(), self.ddy.eval_clamped(x));
        }
        let g_expr = ov
            .and_then(|o| o.g.as_ref())
            .unwrap_or(&self.problem.g);
        let h_expr = ov
            .and_then(|o| o.h.as_ref())
            .unwrap_or(&self.problem.h);
        let g = g_expr.eval(x, yv, dyv, &params)?;
        let h = h_expr.eval(x, yv, dyv, &params)?;
        Ok((g, h))
    }

    fn residual(&self, x: f64) -> Result<f64> {
        let (g, h) = self.g_h(x)?;
        Ok(g * self.ddy.eval_clamped(x) + h)
    }
}

/// Quadrature resolution tied to the candidate's spectral content.
fn quad_nodes(y: &ChebFun) -> usize {
    (4 * y.degree() + 64).min(4096)
}

/// sqrt(∫ [g·y'' + h]²) over the problem interval.
pub fn d1(problem: &ODEProblem, y: &ChebFun) -> Result<f64> {
    let (a, b) = problem.interval();
    let ev = ResidualEval::new(problem, y);
    let n = quad_nodes(y);
    let vals = cheb_points(n, a, b)
        .iter()
        .map(|&x| ev.residual(x))
        .collect::<Result<Vec<_>>>()?;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite residual sample".into()));
    }
    let r = ChebFun::from_samples(a, b, &vals);
    Ok(r.l2_norm())
}

/// Solves ȳ'' = −h/g along y with the problem's original boundary data and
/// returns (‖y − ȳ‖, ȳ).
pub fn d2(problem: &ODEProblem, y: &ChebFun) -> Result<(f64, ChebFun)> {
    let (a, b) = problem.interval();
    let ev = ResidualEval::new(problem, y);
    let n = quad_nodes(y);
    let mut vals = Vec::with_capacity(n + 1);
    for &x in &cheb_points(n, a, b) {
        let (g, h) = ev.g_h(x)?;
        if g.abs() < 1e-12 {
            return Err(Error::GVanishes);
        }
        vals.push(-h / g);
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite comparator sample".into()));
    }
    let big_g = ChebFun::from_samples(a, b, &vals);
    let bar = solve_linear(
        &LinearParams::new(1.0, 0.0, 0.0, 0.0, 1.0),
        &big_g,
        &problem.bc,
    )?;
    let dist = y.subtract(&bar)?.l2_norm();
    Ok((dist, bar))
}

/// L2 distance between a candidate and a pointwise reference.
pub fn d_exact(y: &ChebFun, y_ref: impl Fn(f64) -> f64) -> f64 {
    let (a, b) = y.interval();
    let n = quad_nodes(y).max(256);
    let vals: Vec<f64> = cheb_points(n, a, b)
        .iter()
        .map(|&x| y.eval_clamped(x) - y_ref(x))
        .collect();
    ChebFun::from_samples(a, b, &vals).l2_norm()
}

/// Pointwise residual g·y'' + h along a candidate, honoring limit overrides.
pub fn residual_samples(problem: &ODEProblem, y: &ChebFun, xs: &[f64]) -> Result<Vec<f64>> {
    let ev = ResidualEval::new(problem, y);
    xs.iter().map(|&x| ev.residual(x)).collect()
}

/// Distance of the given kind, as a single scalar.
pub fn distance(problem: &ODEProblem, y: &ChebFun, kind: DistanceKind) -> Result<f64> {
    match kind {
        DistanceKind::D1 => d1(problem, y),
        DistanceKind::D2 => d2(problem, y).map(|(d, _)| d),
    }
}

/// s_n = ‖partial_sum(n, ε)‖; reports s_n/s_{n−2} and classifies the tail.
pub fn s_ratio(e: &Expansion, eps: f64) -> Result<SRatioReport> {
    let order = e.order();
    if order < 2 {
        return Err(Error::Invalid(
            "s_ratio needs an expansion of order ≥ 2".into(),
        ));
    }
    let norms: Vec<f64> = (0..=order).map(|n| e.partial_sum(n, eps).l2_norm()).collect();
    let ratios: Vec<(usize, f64)> = (2..=order).map(|n| (n, norms[n] / norms[n - 2])).collect();
    let tail = &ratios[ratios.len().saturating_sub(5)..];
    let classification = if tail.iter().all(|(_, r)| (r - 1.0).abs() < 1e-2) {
        Convergence::Convergent
    } else {
        Convergence::Divergent {
            limit_ratio: ratios.last().unwrap().1,
        }
    };
    Ok(SRatioReport {
        ratios,
        classification,
    })
}
