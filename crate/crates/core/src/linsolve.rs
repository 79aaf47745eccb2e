//! Exact solver for the constant-coefficient operator
//! p0 y'' + p1 y' + p2 y = F(x) with two-point (BVP) or initial (IVP) data.
//!
//! Every order of the ghost expansion reduces to one such solve.  The
//! particular solution uses variation of parameters with the kernel chosen
//! by the characteristic-root classification; all exponentials are anchored
//! at the interval endpoint that keeps their exponents non-positive, so the
//! optimizer can explore |w|(b-a) in the hundreds without overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{cheb_points, ChebFun};

/// Relative tolerance on the discriminant below which roots count as
/// repeated.
const DISC_REL: f64 = 1e-12;

/// BVP resonance threshold on |sin(omega (b - a))| for complex roots.
const RESONANCE_TOL: f64 = 1e-10;

/// Parameters of the linear ghost operator L = p0 y'' + p1 y' + p2 y + p3,
/// plus the ghost strength ε at which partial sums are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub epsilon: f64,
}

impl LinearParams {
    pub fn new(p0: f64, p1: f64, p2: f64, p3: f64, epsilon: f64) -> Self {
        Self {
            p0,
            p1,
            p2,
            p3,
            epsilon,
        }
    }
}

/// Characteristic roots of p0 w^2 + p1 w + p2 = 0, classified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootData {
    /// p1 = p2 = 0: plain double integration.
    DoubleIntegration,
    /// Two real roots; `w = w_plus - w_minus > 0`.
    RealDistinct { w_plus: f64, w_minus: f64, w: f64 },
    /// A repeated real root.
    RealRepeated { w: f64 },
    /// Complex pair sigma ± i omega (omega > 0).
    ComplexPair { sigma: f64, omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BcKind {
    Bvp,
    Ivp,
}

/// Side conditions: for BVP, `value_left`/`value_right` are y at the two
/// endpoints; for IVP they are y and y' at the left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub kind: BcKind,
    pub x_left: f64,
    pub x_right: f64,
    pub value_left: f64,
    pub value_right: f64,
}

impl BoundaryCondition {
    pub fn bvp(a: f64, b: f64, ya: f64, yb: f64) -> Self {
        assert!(a < b);
        Self {
            kind: BcKind::Bvp,
            x_left: a,
            x_right: b,
            value_left: ya,
            value_right: yb,
        }
    }

    pub fn ivp(a: f64, b: f64, ya: f64, dya: f64) -> Self {
        assert!(a < b);
        Self {
            kind: BcKind::Ivp,
            x_left: a,
            x_right: b,
            value_left: ya,
            value_right: dya,
        }
    }

    /// The same conditions with zero data (used for every order n ≥ 1).
    pub fn homogeneous(&self) -> Self {
        Self {
            value_left: 0.0,
            value_right: 0.0,
            ..*self
        }
    }

    /// The same interval with different data.
    pub fn with_values(&self, left: f64, right: f64) -> Self {
        Self {
            value_left: left,
            value_right: right,
            ..*self
        }
    }
}

pub fn characteristic_roots(p: &LinearParams) -> Result<RootData> {
    if p.p0 == 0.0 {
        return Err(Error::ZeroLeadingCoefficient);
    }
    if p.p1 == 0.0 && p.p2 == 0.0 {
        return Ok(RootData::DoubleIntegration);
    }
    let disc = p.p1 * p.p1 - 4.0 * p.p0 * p.p2;
    let scale = (p.p1 * p.p1).max((4.0 * p.p0 * p.p2).abs());
    if disc.abs() <= DISC_REL * scale {
        return Ok(RootData::RealRepeated {
            w: -p.p1 / (2.0 * p.p0),
        });
    }
    if disc > 0.0 {
        let r1 = (-p.p1 + disc.sqrt()) / (2.0 * p.p0);
        let r2 = (-p.p1 - disc.sqrt()) / (2.0 * p.p0);
        let (w_plus, w_minus) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
        Ok(RootData::RealDistinct {
            w_plus,
            w_minus,
            w: w_plus - w_minus,
        })
    } else {
        Ok(RootData::ComplexPair {
            sigma: -p.p1 / (2.0 * p.p0),
            omega: (-disc).sqrt() / (2.0 * p.p0.abs()),
        })
    }
}

/// Clenshaw-Curtis weights for n+1 second-kind points on [-1, 1].
fn cc_weights(n: usize) -> Vec<f64> {
    let mut ws = vec![0.0; n + 1];
    let pi_n = std::f64::consts::PI / n as f64;
    for (i, w) in ws.iter_mut().enumerate() {
        let gi = if i == 0 || i == n { 0.5 } else { 1.0 };
        let mut acc = 0.0;
        let mut k = 0;
        while k <= n {
            let gk = if k == 0 || k == n { 0.5 } else { 1.0 };
            acc += gk * 2.0 / (1.0 - (k * k) as f64) * (pi_n * (i * k) as f64).cos();
            k += 2;
        }
        *w = 2.0 / n as f64 * gi * acc;
    }
    ws
}

/// v(x) = ∫_s^x kernel(x - u) F(u) du with s chosen by `decay` so the
/// kernel's exponential part never exceeds 1 on the integration range
/// (s = b when decay ≥ 0, else s = a).
fn convolve<K: Fn(f64) -> f64>(f: &ChebFun, decay: f64, rate: f64, kernel: K) -> Result<ChebFun> {
    let (a, b) = f.interval();
    let s = if decay >= 0.0 { b } else { a };
    let n_quad = (f.degree() + (rate * (b - a)) as usize + 48).min(4000);
    let wts = cc_weights(n_quad);
    ChebFun::interpolate(
        |x| {
            if (x - s).abs() < 1e-300 {
                return 0.0;
            }
            let (lo, hi, sign) = if x >= s { (s, x, 1.0) } else { (x, s, -1.0) };
            let pts = cheb_points(n_quad, lo, hi);
            let half = 0.5 * (hi - lo);
            let mut acc = 0.0;
            for (u, w) in pts.iter().zip(&wts) {
                acc += w * kernel(x - u) * f.eval_clamped(*u);
            }
            sign * half * acc
        },
        a,
        b,
        1e-13,
    )
}

/// An exponential e^{w(x - s)} anchored so the exponent is ≤ 0 on [a, b].
fn anchored_exp(a: f64, b: f64, w: f64) -> Result<ChebFun> {
    let s = if w >= 0.0 { b } else { a };
    ChebFun::interpolate(|x| (w * (x - s)).exp(), a, b, 1e-13)
}

/// Applies the side conditions: returns y_p + c1 u1 + c2 u2.
fn fit_boundary(
    y_p: &ChebFun,
    u1: &ChebFun,
    u2: &ChebFun,
    bc: &BoundaryCondition,
) -> Result<ChebFun> {
    let (a, b) = (bc.x_left, bc.x_right);
    let (m, rhs) = match bc.kind {
        BcKind::Bvp => (
            [
                [u1.eval_clamped(a), u2.eval_clamped(a)],
                [u1.eval_clamped(b), u2.eval_clamped(b)],
            ],
            [
                bc.value_left - y_p.eval_clamped(a),
                bc.value_right - y_p.eval_clamped(b),
            ],
        ),
        BcKind::Ivp => {
            let (du1, du2, dyp) = (u1.differentiate(), u2.differentiate(), y_p.differentiate());
            (
                [
                    [u1.eval_clamped(a), u2.eval_clamped(a)],
                    [du1.eval_clamped(a), du2.eval_clamped(a)],
                ],
                [
                    bc.value_left - y_p.eval_clamped(a),
                    bc.value_right - dyp.eval_clamped(a),
                ],
            )
        }
    };
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if det.abs() <= 1e-14 * scale * scale.max(1.0) {
        return Err(Error::ResonantOperator);
    }
    let c1 = (rhs[0] * m[1][1] - rhs[1] * m[0][1]) / det;
    let c2 = (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det;
    y_p.add(&u1.scale(c1))?.add(&u2.scale(c2))
}

/// The unique solution of p0 y'' + p1 y' + p2 y = F with the given side
/// conditions. p3 plays no role here: it enters the expansion only through
/// the forcing of orders 0 and 1.
pub fn solve_linear(p: &LinearParams, f: &ChebFun, bc: &BoundaryCondition) -> Result<ChebFun> {
    let (a, b) = f.interval();
    let tol = 1e-10 * (1.0 + a.abs() + b.abs());
    if (a - bc.x_left).abs() > tol || (b - bc.x_right).abs() > tol {
        return Err(Error::IntervalMismatch(a, b, bc.x_left, bc.x_right));
    }
    let roots = characteristic_roots(p)?;
    match roots {
        RootData::DoubleIntegration => {
            // y'' = F/p0: integrate twice; homogeneous part is a line
            let y_p = f
                .integrate_cumulative()
                .integrate_cumulative()
                .scale(1.0 / p.p0);
            let u1 = ChebFun::constant(a, b, 1.0);
            let u2 = ChebFun::identity(a, b).add(&ChebFun::constant(a, b, -a))?;
            fit_boundary(&y_p, &u1, &u2, bc)
        }
        RootData::RealDistinct { w_plus, w_minus, w } => {
            let v_p = convolve(f, w_plus, w_plus.abs(), |t| (w_plus * t).exp())?;
            let v_m = convolve(f, w_minus, w_minus.abs(), |t| (w_minus * t).exp())?;
            let y_p = v_p.subtract(&v_m)?.scale(1.0 / (p.p0 * w));
            let u1 = anchored_exp(a, b, w_plus)?;
            let u2 = anchored_exp(a, b, w_minus)?;
            fit_boundary(&y_p, &u1, &u2, bc)
        }
        RootData::RealRepeated { w } => {
            let y_p = convolve(f, w, w.abs() + 1.0, |t| t * (w * t).exp())?.scale(1.0 / p.p0);
            let u1 = anchored_exp(a, b, w)?;
            let s = if w >= 0.0 { b } else { a };
            let u2 = ChebFun::interpolate(|x| (x - s) * (w * (x - s)).exp(), a, b, 1e-13)?;
            fit_boundary(&y_p, &u1, &u2, bc)
        }
        RootData::ComplexPair { sigma, omega } => {
            if bc.kind == BcKind::Bvp && (omega * (b - a)).sin().abs() < RESONANCE_TOL {
                return Err(Error::ResonantOperator);
            }
            let y_p = convolve(f, sigma, sigma.abs() + omega, |t| {
                (sigma * t).exp() * (omega * t).sin()
            })?
            .scale(1.0 / (p.p0 * omega));
            let s = if sigma >= 0.0 { b } else { a };
            let u1 =
                ChebFun::interpolate(|x| (sigma * (x - s)).exp() * (omega * x).cos(), a, b, 1e-13)?;
            let u2 =
                ChebFun::interpolate(|x| (sigma * (x - s)).exp() * (omega * x).sin(), a, b, 1e-13)?;
            fit_boundary(&y_p, &u1, &u2, bc)
        }
    }
}
