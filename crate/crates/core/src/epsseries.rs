//! Truncated power series in the ghost parameter ε with ChebFun
//! coefficients, and the lift of a scalar expression g(x, y, y') onto such
//! series.
//!
//! Lifting is what turns the nonlinear terms of the equation into the
//! coefficient functions g_n, h_n consumed by the order-by-order
//! recurrence: composition is done by the standard order-by-order
//! recurrences seeded at the zeroth coefficient, with strict truncation
//! (no coefficient beyond the stated order is ever formed).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::expr::{BinOp, ExprNode, Func, Var};
use crate::funcspace::{ChebFun, COMBINE_TOL};

/// Relative floor under which a zeroth coefficient counts as vanishing for
/// division, log and sqrt lifts.
const SINGULAR_REL: f64 = 1e-12;

/// Tolerance on the synthetic-division remainder when cancelling an x^-j
/// factor against coefficients that vanish at x = 0.
const DEFLATE_REL: f64 = 1e-8;

/// A truncated series c_0 + c_1 ε + … + c_n ε^n of functions on a shared
/// interval.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsSeries {
    coeffs: Vec<ChebFun>,
}

impl EpsSeries {
    pub fn new(coeffs: Vec<ChebFun>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Invalid("empty eps-series".into()));
        }
        let (a, b) = coeffs[0].interval();
        for c in &coeffs[1..] {
            let (a2, b2) = c.interval();
            if (a - a2).abs() > 1e-12 * (1.0 + a.abs() + b.abs())
                || (b - b2).abs() > 1e-12 * (1.0 + a.abs() + b.abs())
            {
                return Err(Error::IntervalMismatch(a, b, a2, b2));
            }
        }
        Ok(Self { coeffs })
    }

    /// The series whose zeroth coefficient is `f` and all others vanish.
    pub fn from_fun(f: ChebFun, order: usize) -> Self {
        let (a, b) = f.interval();
        let mut coeffs = vec![f];
        coeffs.resize(order + 1, ChebFun::zero(a, b));
        Self { coeffs }
    }

    pub fn constant(value: f64, a: f64, b: f64, order: usize) -> Self {
        Self::from_fun(ChebFun::constant(a, b, value), order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn interval(&self) -> (f64, f64) {
        self.coeffs[0].interval()
    }

    pub fn coeff(&self, k: usize) -> &ChebFun {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[ChebFun] {
        &self.coeffs
    }

    /// Drops coefficients beyond the given (smaller or equal) order.
    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order());
        Self {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::Invalid(format!(
                "eps-series order mismatch: {} vs {}",
                self.order(),
                other.order()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(Self { coeffs })
    }

    pub fn subtract(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|f| f.scale(c)).collect(),
        }
    }

    /// Cauchy product, truncated at the common order.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let (a, b) = self.interval();
        let n = self.order();
        let mut coeffs = Vec::with_capacity(n + 1);
        for m in 0..=n {
            let mut acc = ChebFun::zero(a, b);
            for k in 0..=m {
                acc = acc.add(&self.coeffs[k].multiply(&other.coeffs[m - k])?)?;
            }
            coeffs.push(acc);
        }
        Ok(Self { coeffs })
    }

    /// Σ_k c_k ε^k as a single function (Horner in ε).
    pub fn eval_at_eps(&self, eps: f64) -> ChebFun {
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.scale(eps).add(c).expect("shared interval");
        }
        acc
    }
}

/// Pointwise quotient with a vanishing-denominator guard.
fn pointwise_div(num: &ChebFun, den: &ChebFun, ctx: &str) -> Result<ChebFun> {
    let floor = SINGULAR_REL * (1.0 + den.max_abs(0));
    if den.min_abs(257) <= floor {
        return Err(Error::SingularLift(ctx.to_string()));
    }
    let (a, b) = num.interval();
    ChebFun::interpolate(
        |x| num.eval_clamped(x) / den.eval_clamped(x),
        a,
        b,
        COMBINE_TOL,
    )
}

struct LiftCtx<'a> {
    y: &'a EpsSeries,
    dy: &'a EpsSeries,
    x: &'a ChebFun,
    params: &'a HashMap<String, f64>,
    order: usize,
    a: f64,
    b: f64,
}

/// ε-series of `expr(x, y(ε), dy(ε))`, truncated at the order of `y`.
pub fn lift(
    expr: &ExprNode,
    y: &EpsSeries,
    dy: &EpsSeries,
    x: &ChebFun,
    params: &HashMap<String, f64>,
) -> Result<EpsSeries> {
    y.check_order(dy)?;
    let (a, b) = y.interval();
    let ctx = LiftCtx {
        y,
        dy,
        x,
        params,
        order: y.order(),
        a,
        b,
    };
    ctx.lift(expr)
}

/// Resolves a pow exponent (constant or bound parameter) to its value.
fn resolve_expo(e: &ExprNode, params: &HashMap<String, f64>) -> Result<f64> {
    match e {
        ExprNode::Const(c) => Ok(*c),
        ExprNode::Param(p) => params
            .get(p)
            .copied()
            .ok_or_else(|| Error::UnboundParameter(p.clone())),
        other => Err(Error::Invalid(format!(
            "pow exponent `{other}` is neither a constant nor a parameter"
        ))),
    }
}

/// Matches `x` or `x^q` and returns the exponent value.
fn x_power(e: &ExprNode, params: &HashMap<String, f64>) -> Option<f64> {
    match e {
        ExprNode::Var(Var::X) => Some(1.0),
        ExprNode::Binary(BinOp::Pow, base, expo)
            if matches!(**base, ExprNode::Var(Var::X)) =>
        {
            resolve_expo(expo, params).ok()
        }
        _ => None,
    }
}

impl LiftCtx<'_> {
    fn zero(&self) -> ChebFun {
        ChebFun::zero(self.a, self.b)
    }

    fn lift(&self, e: &ExprNode) -> Result<EpsSeries> {
        match e {
            ExprNode::Const(c) => Ok(EpsSeries::constant(*c, self.a, self.b, self.order)),
            ExprNode::Param(p) => {
                let v = self
                    .params
                    .get(p)
                    .copied()
                    .ok_or_else(|| Error::UnboundParameter(p.clone()))?;
                Ok(EpsSeries::constant(v, self.a, self.b, self.order))
            }
            ExprNode::Var(Var::X) => Ok(EpsSeries::from_fun(self.x.clone(), self.order)),
            ExprNode::Var(Var::Y) => Ok(self.y.clone()),
            ExprNode::Var(Var::Dy) => Ok(self.dy.clone()),
            ExprNode::Neg(a) => Ok(self.lift(a)?.scale(-1.0)),
            ExprNode::Binary(BinOp::Add, l, r) => self.lift(l)?.add(&self.lift(r)?),
            ExprNode::Binary(BinOp::Sub, l, r) => self.lift(l)?.subtract(&self.lift(r)?),
            ExprNode::Binary(BinOp::Mul, l, r) => {
                // a negative power of x must cancel against zeros of the
                // other factor rather than being lifted on its own
                if let Some(q) = x_power(l, self.params).filter(|q| *q < 0.0) {
                    let s = self.lift(r)?;
                    return self.shift_x_power(&s, q, &e.to_string());
                }
                if let Some(q) = x_power(r, self.params).filter(|q| *q < 0.0) {
                    let s = self.lift(l)?;
                    return self.shift_x_power(&s, q, &e.to_string());
                }
                self.lift(l)?.multiply(&self.lift(r)?)
            }
            ExprNode::Binary(BinOp::Div, l, r) => {
                if let Some(q) = x_power(r, self.params) {
                    let s = self.lift(l)?;
                    return self.shift_x_power(&s, -q, &e.to_string());
                }
                let num = self.lift(l)?;
                let den = self.lift(r)?;
                self.series_div(&num, &den, &e.to_string())
            }
            ExprNode::Binary(BinOp::Pow, base, expo) => {
                let q = resolve_expo(expo, self.params)?;
                if matches!(**base, ExprNode::Var(Var::X)) {
                    let one = EpsSeries::constant(1.0, self.a, self.b, self.order);
                    return self.shift_x_power(&one, q, &e.to_string());
                }
                let s = self.lift(base)?;
                if q == 0.0 {
                    return Ok(EpsSeries::constant(1.0, self.a, self.b, self.order));
                }
                if q.fract() == 0.0 && q.abs() <= 64.0 {
                    let p = self.series_ipow(&s, q.abs() as u64)?;
                    if q > 0.0 {
                        return Ok(p);
                    }
                    let one = EpsSeries::constant(1.0, self.a, self.b, self.order);
                    return self.series_div(&one, &p, &e.to_string());
                }
                // non-integer exponent: exp(q log base), positive base needed
                let l = self.series_log(&s, &e.to_string())?;
                self.series_exp(&l.scale(q))
            }
            ExprNode::Call(Func::Exp, arg) => {
                let s = self.lift(arg)?;
                self.series_exp(&s)
            }
            ExprNode::Call(Func::Log, arg) => {
                let s = self.lift(arg)?;
                self.series_log(&s, &e.to_string())
            }
            ExprNode::Call(Func::Sqrt, arg) => {
                let s = self.lift(arg)?;
                self.series_sqrt(&s, &e.to_string())
            }
            ExprNode::Call(Func::Sin, arg) => {
                let s = self.lift(arg)?;
                Ok(self.series_circular(&s, false)?.0)
            }
            ExprNode::Call(Func::Cos, arg) => {
                let s = self.lift(arg)?;
                Ok(self.series_circular(&s, false)?.1)
            }
            ExprNode::Call(Func::Sinh, arg) => {
                let s = self.lift(arg)?;
                Ok(self.series_circular(&s, true)?.0)
            }
            ExprNode::Call(Func::Cosh, arg) => {
                let s = self.lift(arg)?;
                Ok(self.series_circular(&s, true)?.1)
            }
        }
    }

    /// Multiplies every coefficient by x^q. For negative q on an interval
    /// containing 0 the factor must cancel: each coefficient is deflated by
    /// synthetic division, and a non-small remainder is a singular lift.
    fn shift_x_power(&self, s: &EpsSeries, q: f64, ctx: &str) -> Result<EpsSeries> {
        if q == 0.0 {
            return Ok(s.clone());
        }
        let touches_zero = self.a <= 0.0 && self.b >= 0.0;
        if q > 0.0 || !touches_zero {
            if q < 0.0 && self.a < 0.0 && self.b > 0.0 {
                return Err(Error::SingularLift(ctx.to_string()));
            }
            let xp = ChebFun::interpolate(|x| x.powf(q), self.a, self.b, COMBINE_TOL)
                .map_err(|_| Error::SingularLift(ctx.to_string()))?;
            let coeffs = s
                .coeffs()
                .iter()
                .map(|c| c.multiply(&xp))
                .collect::<Result<_>>()?;
            return EpsSeries::new(coeffs);
        }
        if q.fract() != 0.0 {
            return Err(Error::SingularLift(ctx.to_string()));
        }
        let m = (-q) as usize;
        let mut coeffs = Vec::with_capacity(s.order() + 1);
        for c in s.coeffs() {
            let scale = 1.0 + c.max_abs(0);
            let mut cur = c.clone();
            for _ in 0..m {
                let (quot, rem) = cur.deflate(0.0);
                if rem.abs() > DEFLATE_REL * scale {
                    return Err(Error::SingularLift(ctx.to_string()));
                }
                cur = quot;
            }
            coeffs.push(cur);
        }
        EpsSeries::new(coeffs)
    }

    /// Integer power by binary exponentiation over series multiply.
    fn series_ipow(&self, s: &EpsSeries, mut k: u64) -> Result<EpsSeries> {
        let mut acc = EpsSeries::constant(1.0, self.a, self.b, self.order);
        let mut base = s.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.multiply(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.multiply(&base)?;
            }
        }
        Ok(acc)
    }

    /// E = exp(S): E_0 = exp(S_0), n E_n = Σ_{k=1..n} k S_k E_{n−k}.
    fn series_exp(&self, s: &EpsSeries) -> Result<EpsSeries> {
        let mut e = vec![s.coeff(0).map(f64::exp)?];
        for n in 1..=self.order {
            let mut acc = self.zero();
            for k in 1..=n {
                acc = acc.add(&s.coeff(k).scale(k as f64).multiply(&e[n - k])?)?;
            }
            e.push(acc.scale(1.0 / n as f64));
        }
        EpsSeries::new(e)
    }

    /// L = log(S): n L_n S_0 = n S_n − Σ_{k=1..n−1} k L_k S_{n−k}.
    fn series_log(&self, s: &EpsSeries, ctx: &str) -> Result<EpsSeries> {
        let s0 = s.coeff(0);
        let floor = SINGULAR_REL * (1.0 + s0.max_abs(0));
        // log additionally needs positivity, not just distance from zero
        let (a, b) = (self.a, self.b);
        let min_val = crate::funcspace::cheb_points(257, a, b)
            .iter()
            .fold(f64::INFINITY, |m, &x| m.min(s0.eval_clamped(x)));
        if min_val <= floor {
            return Err(Error::SingularLift(ctx.to_string()));
        }
        let mut l = vec![s0.map(f64::ln)?];
        for n in 1..=self.order {
            let mut num = s.coeff(n).scale(n as f64);
            for k in 1..n {
                num = num.subtract(&l[k].scale(k as f64).multiply(&s.coeff(n - k))?)?;
            }
            l.push(pointwise_div(&num, &s0.scale(n as f64), ctx)?);
        }
        EpsSeries::new(l)
    }

    /// R = sqrt(S): R_n = (S_n − Σ_{k=1..n−1} R_k R_{n−k}) / (2 R_0).
    fn series_sqrt(&self, s: &EpsSeries, ctx: &str) -> Result<EpsSeries> {
        let s0 = s.coeff(0);
        let floor = SINGULAR_REL * (1.0 + s0.max_abs(0));
        let min_val = crate::funcspace::cheb_points(257, self.a, self.b)
            .iter()
            .fold(f64::INFINITY, |m, &x| m.min(s0.eval_clamped(x)));
        if min_val <= floor {
            return Err(Error::SingularLift(ctx.to_string()));
        }
        let r0 = s0.map(f64::sqrt)?;
        let mut r = vec![r0.clone()];
        let den = r0.scale(2.0);
        for n in 1..=self.order {
            let mut num = s.coeff(n).clone();
            for k in 1..n {
                num = num.subtract(&r[k].multiply(&r[n - k])?)?;
            }
            r.push(pointwise_div(&num, &den, ctx)?);
        }
        EpsSeries::new(r)
    }

    /// Q = A/B: Q_n = (A_n − Σ_{k=1..n} B_k Q_{n−k}) / B_0.
    fn series_div(&self, a: &EpsSeries, b: &EpsSeries, ctx: &str) -> Result<EpsSeries> {
        let b0 = b.coeff(0);
        let mut q = vec![pointwise_div(a.coeff(0), b0, ctx)?];
        for n in 1..=self.order {
            let mut num = a.coeff(n).clone();
            for k in 1..=n {
                num = num.subtract(&b.coeff(k).multiply(&q[n - k])?)?;
            }
            q.push(pointwise_div(&num, b0, ctx)?);
        }
        EpsSeries::new(q)
    }

    /// Coupled pair (sin, cos) or (sinh, cosh) of S:
    /// n Z_n = Σ k S_k C_{n−k};  n C_n = ∓ Σ k S_k Z_{n−k}.
    fn series_circular(&self, s: &EpsSeries, hyperbolic: bool) -> Result<(EpsSeries, EpsSeries)> {
        let (z0, c0) = if hyperbolic {
            (s.coeff(0).map(f64::sinh)?, s.coeff(0).map(f64::cosh)?)
        } else {
            (s.coeff(0).map(f64::sin)?, s.coeff(0).map(f64::cos)?)
        };
        let sign = if hyperbolic { 1.0 } else { -1.0 };
        let mut z = vec![z0];
        let mut c = vec![c0];
        for n in 1..=self.order {
            let mut az = self.zero();
            let mut ac = self.zero();
            for k in 1..=n {
                let sk = s.coeff(k).scale(k as f64);
                az = az.add(&sk.multiply(&c[n - k])?)?;
                ac = ac.add(&sk.multiply(&z[n - k])?)?;
            }
            z.push(az.scale(1.0 / n as f64));
            c.push(ac.scale(sign / n as f64));
        }
        Ok((EpsSeries::new(z)?, EpsSeries::new(c)?))
    }
}
