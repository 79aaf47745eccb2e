//! Post-processing of converged approximants: the ghost expansion of the
//! error (weights extracted from successive optimal partial sums) and a
//! linearized residual correction that squares the error of a good
//! approximation per step.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::Var;
use crate::funcspace::{cheb_points, ChebFun};
use crate::linsolve::BcKind;
use crate::metrics::d1;
use crate::recurrence::ODEProblem;
use serde::{Deserialize, Serialize};

/// One term of the ghost expansion: y* at order m enters as w_m · d*(m).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GhostTerm {
    pub m: usize,
    pub d_star: f64,
    pub w: ChebFun,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GhostExpansion {
    pub terms: Vec<GhostTerm>,
    /// Set when the weight norms spread by more than a factor 100, which
    /// signals that the distances do not track the actual error decay.
    pub suspect: bool,
}

impl GhostExpansion {
    /// Σ_{m ≤ up_to} w_m · d*(m); telescopes back to the partial sum.
    pub fn reconstruct(&self, up_to: usize) -> ChebFun {
        let (a, b) = self.terms[0].w.interval();
        let mut acc = ChebFun::zero(a, b);
        for t in self.terms.iter().filter(|t| t.m <= up_to) {
            acc = acc.add(&t.w.scale(t.d_star)).expect("terms share an interval");
        }
        acc
    }
}

/// Builds the ghost expansion from the per-order optimal partial sums and
/// their optimal distances: w_0 = y*_0/d*(0), w_m = (y*_m − y*_{m−1})/d*(m).
pub fn ghost_expansion(partials: &[(ChebFun, f64)]) -> Result<GhostExpansion> {
    if partials.is_empty() {
        return Err(Error::Invalid("ghost expansion needs ≥ 1 partial sum".into()));
    }
    if partials.iter().any(|(_, d)| *d <= 0.0 || !d.is_finite()) {
        return Err(Error::Invalid(
            "ghost expansion needs positive finite distances".into(),
        ));
    }
    let mut terms = Vec::with_capacity(partials.len());
    for (m, (y, d)) in partials.iter().enumerate() {
        let diff = if m == 0 {
            y.clone()
        } else {
            y.subtract(&partials[m - 1].0)?
        };
        terms.push(GhostTerm {
            m,
            d_star: *d,
            w: diff.scale(1.0 / d),
        });
    }
    let norms: Vec<f64> = terms.iter().map(|t| t.w.l2_norm()).collect();
    let lo = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = norms.iter().cloned().fold(0.0f64, f64::max);
    let suspect = lo > 0.0 && hi / lo > 100.0;
    Ok(GhostExpansion { terms, suspect })
}

/// First-order Chebyshev differentiation matrix on n+1 second-kind points
/// of [a, b], ordered left to right.
fn diff_matrix(n: usize, a: f64, b: f64) -> DMatrix<f64> {
    let xs = cheb_points(n, a, b);
    let c = |i: usize| if i == 0 || i == n { 2.0 } else { 1.0 };
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                let v = c(i) / c(j) * sign / (xs[i] - xs[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    d
}

/// Coefficients of the linearized residual equation along `y`:
/// A z'' + B z' + C z = −R with A = g, B = g_dy·y'' + h_dy,
/// C = g_y·y'' + h_y, R = g·y'' + h, all evaluated on (x, y, y').
/// Limit overrides of the problem are honored at matching nodes.
fn linearized_coefficients(
    problem: &ODEProblem,
    y: &ChebFun,
    xs: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let dy = y.differentiate();
    let ddy = dy.differentiate();
    let (ia, ib) = y.interval();
    let scale = (ib - ia).abs().max(ia.abs()).max(ib.abs());
    let g_y = problem.g.differentiate(Var::Y);
    let g_dy = problem.g.differentiate(Var::Dy);
    let h_y = problem.h.differentiate(Var::Y);
    let h_dy = problem.h.differentiate(Var::Dy);

    let mut av = Vec::with_capacity(xs.len());
    let mut bv = Vec::with_capacity(xs.len());
    let mut cv = Vec::with_capacity(xs.len());
    let mut rv = Vec::with_capacity(xs.len());
    for &x in xs {
        let yv = y.eval_clamped(x);
        let dv = dy.eval_clamped(x);
        let sv = ddy.eval_clamped(x);
        let over = problem
            .limit_overrides
            .iter()
            .find(|o| (x - o.x).abs() <= 1e-12 * (1.0 + scale));
        let mut params = problem.params.clone();
        params.insert("ddy".to_string(), sv);
        let (ge, he) = match over {
            Some(o) => (
                o.g.as_ref().unwrap_or(&problem.g),
                o.h.as_ref().unwrap_or(&problem.h),
            ),
            None => (&problem.g, &problem.h),
        };
        // derivatives of the override expressions where one applies
        let (gye, gdye, hye, hdye) = match over {
            Some(_) => (
                ge.differentiate(Var::Y),
                ge.differentiate(Var::Dy),
                he.differentiate(Var::Y),
                he.differentiate(Var::Dy),
            ),
            None => (g_y.clone(), g_dy.clone(), h_y.clone(), h_dy.clone()),
        };
        let g = ge.eval(x, yv, dv, &params)?;
        let h = he.eval(x, yv, dv, &params)?;
        av.push(g);
        bv.push(gdye.eval(x, yv, dv, &params)? * sv + hdye.eval(x, yv, dv, &params)?);
        cv.push(gye.eval(x, yv, dv, &params)? * sv + hye.eval(x, yv, dv, &params)?);
        rv.push(g * sv + h);
    }
    Ok((av, bv, cv, rv))
}

/// One linearized correction step: solves the collocated equation
/// A z'' + B z' + C z = −R with homogeneous data of the problem's kind and
/// returns z, provided d1(y + z) does not exceed d1(y).
pub fn linear_correction(problem: &ODEProblem, y: &ChebFun) -> Result<ChebFun> {
    let (a, b) = y.interval();
    let n = (2 * y.degree() + 32).min(1024);
    let xs = cheb_points(n, a, b);
    let (av, bv, cv, rv) = linearized_coefficients(problem, y, &xs)?;

    let d = diff_matrix(n, a, b);
    let d2 = &d * &d;
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            m[(i, j)] = av[i] * d2[(i, j)] + bv[i] * d[(i, j)];
        }
        m[(i, i)] += cv[i];
    }
    let mut rhs = DVector::from_fn(n + 1, |i, _| -rv[i]);

    match problem.bc.kind {
        BcKind::Bvp => {
            for j in 0..=n {
                m[(0, j)] = 0.0;
                m[(n, j)] = 0.0;
            }
            m[(0, 0)] = 1.0;
            m[(n, n)] = 1.0;
            rhs[0] = 0.0;
            rhs[n] = 0.0;
        }
        BcKind::Ivp => {
            for j in 0..=n {
                m[(1, j)] = d[(0, j)];
                m[(0, j)] = 0.0;
            }
            m[(0, 0)] = 1.0;
            rhs[0] = 0.0;
            rhs[1] = 0.0;
        }
    }

    let lu = m.lu();
    let z_vals = lu
        .solve(&rhs)
        .ok_or_else(|| Error::CorrectionFailed("singular collocation matrix".into()))?;
    if z_vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::CorrectionFailed(
            "non-finite collocation solution".into(),
        ));
    }
    let z = ChebFun::from_samples(a, b, z_vals.as_slice());

    let before = d1(problem, y)?;
    let after = d1(problem, &y.add(&z)?)?;
    if after > before {
        return Err(Error::CorrectionFailed(format!(
            "correction increased d1 from {before:e} to {after:e}"
        )));
    }
    Ok(z)
}
