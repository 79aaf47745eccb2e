//! Piecewise IVP marcher: solves on a window, places a knot at a residual
//! zero near the window end, hands the state across, and adapts the window
//! length to keep the optimal distance below a budget.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::ChebFun;
use crate::linsolve::{BcKind, BoundaryCondition, LinearParams};
use crate::metrics::DistanceKind;
use crate::optimize::{scan_best, AxisGrid, AxisSpec, ParamSpec};
use crate::recurrence::{expand, ODEProblem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarchConfig {
    pub order: usize,
    /// Distance budget per window; windows exceeding it are shrunk.
    pub d_max: f64,
    /// Initial window length.
    pub t0: f64,
    /// Total length to cover from the problem's left endpoint.
    pub horizon: f64,
    pub shrink: f64,
    pub grow: f64,
    pub max_pieces: usize,
}

impl MarchConfig {
    pub fn new(order: usize, d_max: f64, t0: f64, horizon: f64) -> Self {
        Self {
            order,
            d_max,
            t0,
            horizon,
            shrink: 0.75,
            grow: 1.125,
            max_pieces: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Piece {
    pub interval: [f64; 2],
    pub params: LinearParams,
    pub d1: f64,
    pub fun: ChebFun,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiecewiseSolution {
    pub knots: Vec<f64>,
    pub pieces: Vec<Piece>,
}

impl PiecewiseSolution {
    fn piece_at(&self, x: f64) -> &Piece {
        let idx = self
            .pieces
            .iter()
            .position(|p| x <= p.interval[1])
            .unwrap_or(self.pieces.len() - 1);
        &self.pieces[idx]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.piece_at(x).fun.eval_clamped(x)
    }

    pub fn eval_dy(&self, x: f64) -> f64 {
        self.piece_at(x).fun.differentiate().eval_clamped(x)
    }
}

/// Residual g·y'' + h of a candidate piece at x; NaN when the expressions
/// cannot be evaluated there.
fn residual_at(problem: &ODEProblem, y: &ChebFun, dy: &ChebFun, ddy: &ChebFun, x: f64) -> f64 {
    let yv = y.eval_clamped(x);
    let dv = dy.eval_clamped(x);
    let sv = ddy.eval_clamped(x);
    let g = problem.g.eval(x, yv, dv, &problem.params);
    let h = problem.h.eval(x, yv, dv, &problem.params);
    match (g, h) {
        (Ok(g), Ok(h)) => g * sv + h,
        _ => f64::NAN,
    }
}

/// Knot choice: the residual zero in [lo, hi] closest to hi, refined by
/// bisection; hi when the residual has no usable sign change.
fn select_knot(problem: &ODEProblem, y: &ChebFun, lo: f64, hi: f64) -> f64 {
    let dy = y.differentiate();
    let ddy = dy.differentiate();
    let m = 101;
    let xs: Vec<f64> = (0..m)
        .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
        .collect();
    let rs: Vec<f64> = xs
        .iter()
        .map(|&x| residual_at(problem, y, &dy, &ddy, x))
        .collect();
    let amp = rs.iter().cloned().filter(|v| v.is_finite()).fold(0.0f64, |a, v| a.max(v.abs()));
    if amp < 1e-12 * (1.0 + y.max_abs(64)) {
        return hi; // residual at noise level: no meaningful zero
    }
    let mut found: Option<(f64, f64)> = None;
    for i in (1..m).rev() {
        let (ra, rb) = (rs[i - 1], rs[i]);
        if ra.is_finite() && rb.is_finite() && ra * rb < 0.0 {
            found = Some((xs[i - 1], xs[i]));
            break;
        }
    }
    let Some((mut a, mut b)) = found else {
        return hi;
    };
    let mut fa = residual_at(problem, y, &dy, &ddy, a);
    for _ in 0..60 {
        let c = 0.5 * (a + b);
        let fc = residual_at(problem, y, &dy, &ddy, c);
        if !fc.is_finite() {
            return hi;
        }
        if fa * fc <= 0.0 {
            b = c;
        } else {
            a = c;
            fa = fc;
        }
    }
    0.5 * (a + b)
}

/// Marches the IVP from the problem's left endpoint across the horizon.
pub fn march(problem: &Arc<ODEProblem>, cfg: &MarchConfig) -> Result<PiecewiseSolution> {
    if problem.bc.kind != BcKind::Ivp {
        return Err(Error::Invalid("march requires an IVP problem".into()));
    }
    let x0 = problem.bc.x_left;
    let x_end = x0 + cfg.horizon;
    let edge_tol = 1e-9 * cfg.horizon;

    let mut xc = x0;
    let mut y_c = problem.bc.value_left;
    let mut dy_c = problem.bc.value_right;
    let mut t = cfg.t0;
    let mut last: Option<(f64, f64)> = None; // (p0*, window length) of last success
    let mut knots = vec![x0];
    let mut pieces: Vec<Piece> = Vec::new();

    while xc < x_end - edge_tol {
        if pieces.len() >= cfg.max_pieces {
            return Err(Error::MarchUnfinished {
                max: cfg.max_pieces,
                x: xc,
            });
        }
        let clipped = t >= x_end - xc;
        let t_here = t.min(x_end - xc);
        if !clipped && t_here < 1e-3 * cfg.t0 {
            return Err(Error::MarchStalled {
                t: t_here,
                floor: 1e-3 * cfg.t0,
                d_max: cfg.d_max,
                x: xc,
            });
        }
        let sub = Arc::new(
            problem
                .as_ref()
                .clone()
                .with_bc(BoundaryCondition::ivp(xc, xc + t_here, y_c, dy_c)),
        );
        // warm start: the optimal p0 scales with the window length
        let spec = match last {
            Some((p0, t_prev)) => {
                let center = (p0 * t_here / t_prev).max(1e-12);
                ParamSpec {
                    p0: AxisSpec::Search(AxisGrid {
                        lo: center / 10.0,
                        hi: center * 10.0,
                        points: 80,
                        log: true,
                    }),
                    p1: AxisSpec::Fixed(0.0),
                    p2: AxisSpec::Fixed(0.0),
                    p3: AxisSpec::Fixed(0.0),
                    epsilon: AxisSpec::Fixed(1.0),
                }
            }
            None => ParamSpec::restricted_default(t_here),
        };
        let rec = scan_best(&sub, cfg.order, &spec, DistanceKind::D1)?;
        if !(rec.d_star <= cfg.d_max) {
            t = cfg.shrink * t_here;
            continue;
        }
        let e = expand(&sub, rec.params, cfg.order)?;
        let y = e.partial_sum(cfg.order, rec.params.epsilon);
        let knot = if clipped {
            x_end
        } else {
            select_knot(&sub, &y, xc + 0.5 * t_here, xc + t_here)
        };
        let dyf = y.differentiate();
        y_c = y.eval_clamped(knot);
        dy_c = dyf.eval_clamped(knot);
        pieces.push(Piece {
            interval: [xc, knot],
            params: rec.params,
            d1: rec.d_star,
            fun: y,
        });
        knots.push(knot);
        xc = knot;
        last = Some((rec.params.p0, t_here));
        t = cfg.grow * t_here;
    }
    Ok(PiecewiseSolution { knots, pieces })
}
