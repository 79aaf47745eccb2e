//! The order-by-order hierarchy: given the problem g(x,y,y')·y'' + h(x,y,y')
//! = 0 embedded as L y + ε(N y − L y) = 0, the coefficients of
//! y = Σ ỹ_k ε^k satisfy p0 ỹ_n'' + p1 ỹ_n' + p2 ỹ_n = F_n with
//!
//! F_0 = −p3,
//! F_n = p0 ỹ''_{n−1} − h_{n−1} − Σ_{l=0}^{n−1} g_{n−1−l} ỹ''_l
//!       + p1 ỹ'_{n−1} + p2 ỹ_{n−1} + p3 [n=1],
//!
//! where g_k, h_k are the ε-series coefficients of g and h lifted over the
//! partial solution series. Order 0 carries the problem's boundary data;
//! every later order is solved with homogeneous data.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::epsseries::{lift, EpsSeries};
use crate::error::Result;
use crate::expr::ExprNode;
use crate::funcspace::ChebFun;
use crate::linsolve::{solve_linear, BoundaryCondition, LinearParams};

/// Replacement expressions for g and/or h at a single point where the
/// stored expression is an indeterminate form (e.g. 2y'/x at x = 0). The
/// override may reference `ddy` as a named parameter bound to y''(x).
#[derive(Debug, Clone)]
pub struct LimitOverride {
    pub x: f64,
    pub g: Option<ExprNode>,
    pub h: Option<ExprNode>,
}

/// A second-order problem g·y'' + h = 0 with side conditions and bound
/// parameters.
#[derive(Clone)]
pub struct ODEProblem {
    pub g: ExprNode,
    pub h: ExprNode,
    pub bc: BoundaryCondition,
    pub params: HashMap<String, f64>,
    pub exact: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    pub limit_overrides: Vec<LimitOverride>,
}

impl fmt::Debug for ODEProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ODEProblem")
            .field("g", &self.g.to_string())
            .field("h", &self.h.to_string())
            .field("bc", &self.bc)
            .field("params", &self.params)
            .field("exact", &self.exact.is_some())
            .field("limit_overrides", &self.limit_overrides)
            .finish()
    }
}

impl ODEProblem {
    pub fn new(g: ExprNode, h: ExprNode, bc: BoundaryCondition) -> Self {
        Self {
            g,
            h,
            bc,
            params: HashMap::new(),
            exact: None,
            limit_overrides: Vec::new(),
        }
    }

    pub fn with_params(mut self, params: HashMap<String, f64>) -> Self {
        self.params = params;
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_exact(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(f));
        self
    }

    pub fn with_limit_override(mut self, o: LimitOverride) -> Self {
        self.limit_overrides.push(o);
        self
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.bc.x_left, self.bc.x_right)
    }

    /// The same problem on different side conditions (used by the marcher).
    pub fn with_bc(mut self, bc: BoundaryCondition) -> Self {
        self.bc = bc;
        self
    }
}

/// The accumulated expansion ỹ_0..ỹ_n at a fixed parameter point.
#[derive(Debug, Clone)]
pub struct Expansion {
    problem: Arc<ODEProblem>,
    p: LinearParams,
    coeffs: Vec<ChebFun>,
    d1_coeffs: Vec<ChebFun>,
    d2_coeffs: Vec<ChebFun>,
    forcings: Vec<ChebFun>,
}

/// Runs the hierarchy up to order `n_max`.
pub fn expand(problem: &Arc<ODEProblem>, p: LinearParams, n_max: usize) -> Result<Expansion> {
    let mut e = Expansion::order_zero(problem.clone(), p)?;
    e.extend(n_max)?;
    Ok(e)
}

impl Expansion {
    fn order_zero(problem: Arc<ODEProblem>, p: LinearParams) -> Result<Self> {
        let (a, b) = problem.interval();
        let f0 = ChebFun::constant(a, b, -p.p3);
        let y0 = solve_linear(&p, &f0, &problem.bc)?;
        let dy0 = y0.differentiate();
        let ddy0 = dy0.differentiate();
        Ok(Self {
            problem,
            p,
            coeffs: vec![y0],
            d1_coeffs: vec![dy0],
            d2_coeffs: vec![ddy0],
            forcings: Vec::new(),
        })
    }

    pub fn params(&self) -> &LinearParams {
        &self.p
    }

    pub fn problem(&self) -> &Arc<ODEProblem> {
        &self.problem
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &ChebFun {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[ChebFun] {
        &self.coeffs
    }

    /// F_1..F_n, retained for diagnostics.
    pub fn forcings(&self) -> &[ChebFun] {
        &self.forcings
    }

    /// Extends the hierarchy in place up to the given order.
    pub fn extend(&mut self, n_max: usize) -> Result<()> {
        let (a, b) = self.problem.interval();
        let x = ChebFun::identity(a, b);
        let hom = self.problem.bc.homogeneous();
        while self.order() < n_max {
            let n = self.order() + 1;
            let y = EpsSeries::new(self.coeffs.clone())?;
            let dy = EpsSeries::new(self.d1_coeffs.clone())?;
            let g = lift(&self.problem.g, &y, &dy, &x, &self.problem.params)?;
            let h = lift(&self.problem.h, &y, &dy, &x, &self.problem.params)?;
            // the p0 ỹ″_{n−1} term and the l = n−1 sum term are combined so
            // that a constant g equal to p0 cancels exactly instead of
            // leaving grid round-trip noise amplified by differentiation
            let delta = ChebFun::constant(a, b, self.p.p0).subtract(g.coeff(0))?;
            let mut f = delta
                .multiply(&self.d2_coeffs[n - 1])?
                .subtract(h.coeff(n - 1))?;
            for l in 0..n - 1 {
                f = f.subtract(&g.coeff(n - 1 - l).multiply(&self.d2_coeffs[l])?)?;
            }
            f = f
                .add(&self.d1_coeffs[n - 1].scale(self.p.p1))?
                .add(&self.coeffs[n - 1].scale(self.p.p2))?;
            if n == 1 {
                f = f.add(&ChebFun::constant(a, b, self.p.p3))?;
            }
            let y_n = solve_linear(&self.p, &f, &hom)?;
            let dy_n = y_n.differentiate();
            let ddy_n = dy_n.differentiate();
            self.coeffs.push(y_n);
            self.d1_coeffs.push(dy_n);
            self.d2_coeffs.push(ddy_n);
            self.forcings.push(f);
        }
        Ok(())
    }

    /// y_n(x; ε, p) = Σ_{k≤n} ỹ_k ε^k.
    pub fn partial_sum(&self, n: usize, eps: f64) -> ChebFun {
        assert!(n <= self.order());
        let mut acc = self.coeffs[n].clone();
        for k in (0..n).rev() {
            acc = acc.scale(eps).add(&self.coeffs[k]).expect("shared interval");
        }
        acc
    }
}
