//! Smooth functions on an interval, represented by Chebyshev coefficients
//! with adaptive degree.
//!
//! Sampling uses Chebyshev points of the second kind; the degree doubles
//! (16, 32, ..., 4096) until the trailing coefficients drop below the
//! requested tolerance. All calculus (derivative, cumulative integral,
//! Clenshaw-Curtis definite integral, L2 norm) operates directly on the
//! coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trailing coefficients below `TRIM_REL * max|coeff|` are dropped.
pub const TRIM_REL: f64 = 1e-14;

/// Hard degree cap; adaptive interpolation fails fast beyond it.
pub const MAX_DEGREE: usize = 4096;

/// Default tolerance for re-interpolation after algebraic combination.
pub const COMBINE_TOL: f64 = 1e-13;

/// A smooth real function on `[a, b]`, held as Chebyshev-T coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebFun {
    interval: [f64; 2],
    coeffs: Vec<f64>,
}

/// Chebyshev points of the second kind on `[a, b]`, ordered left to right.
pub fn cheb_points(n: usize, a: f64, b: f64) -> Vec<f64> {
    if n == 0 {
        return vec![0.5 * (a + b)];
    }
    (0..=n)
        .map(|j| {
            // reversed so the list runs a..b
            let z = -(std::f64::consts::PI * j as f64 / n as f64).cos();
            a + 0.5 * (b - a) * (z + 1.0)
        })
        .collect()
}

/// DCT of samples at second-kind points (ordered left to right) into
/// Chebyshev coefficients. Direct O(n^2) evaluation.
fn values_to_coeffs(vals: &[f64]) -> Vec<f64> {
    let n = vals.len() - 1;
    if n == 0 {
        return vec![vals[0]];
    }
    let pi_n = std::f64::consts::PI / n as f64;
    let mut coeffs = vec![0.0; n + 1];
    for (k, c) in coeffs.iter_mut().enumerate() {
        // vals[j] sits at z_j = -cos(pi j / n); rewrite as the standard sum
        // over u_i = f(cos(pi i / n)) with i = n - j.
        let mut acc = 0.5 * (vals[n] + if k % 2 == 0 { vals[0] } else { -vals[0] });
        for (i, &v) in vals.iter().enumerate().skip(1).take(n - 1).map(|(j, v)| (n - j, v)) {
            acc += v * (pi_n * (i * k) as f64).cos();
        }
        *c = 2.0 * acc / n as f64;
    }
    coeffs[0] *= 0.5;
    coeffs[n] *= 0.5;
    coeffs
}

fn clenshaw(coeffs: &[f64], z: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * z * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + z * b1 - b2
}

impl ChebFun {
    /// Builds directly from coefficients (no trimming).
    pub fn from_coeffs(a: f64, b: f64, coeffs: Vec<f64>) -> Self {
        assert!(a < b, "interval must satisfy a < b");
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Self {
            interval: [a, b],
            coeffs,
        }
    }

    pub fn constant(a: f64, b: f64, value: f64) -> Self {
        Self::from_coeffs(a, b, vec![value])
    }

    /// The identity function x on `[a, b]`.
    pub fn identity(a: f64, b: f64) -> Self {
        Self::from_coeffs(a, b, vec![0.5 * (a + b), 0.5 * (b - a)])
    }

    pub fn zero(a: f64, b: f64) -> Self {
        Self::constant(a, b, 0.0)
    }

    /// Builds from samples at second-kind Chebyshev points ordered left to
    /// right (as produced by [`cheb_points`]), then trims.
    pub fn from_samples(a: f64, b: f64, vals: &[f64]) -> Self {
        let mut out = Self::from_coeffs(a, b, values_to_coeffs(vals));
        out.trim();
        out
    }

    /// Adaptive interpolation of a pointwise function.
    pub fn interpolate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Self> {
        assert!(a < b, "interval must satisfy a < b");
        let tol = tol.max(1e-14);
        let mut n = 16usize;
        loop {
            let pts = cheb_points(n, a, b);
            let mut vals = Vec::with_capacity(n + 1);
            for &x in &pts {
                let v = f(x);
                if !v.is_finite() {
                    return Err(Error::EvalDomain {
                        context: "interpolate".into(),
                        x,
                        message: format!("sample is {v}"),
                    });
                }
                vals.push(v);
            }
            let coeffs = values_to_coeffs(&vals);
            let maxc = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let tail = coeffs[n - 1].abs().max(coeffs[n].abs());
            if maxc == 0.0 || tail <= tol * maxc {
                let mut out = Self::from_coeffs(a, b, coeffs);
                out.trim();
                return Ok(out);
            }
            if n >= MAX_DEGREE {
                return Err(Error::InterpolationDiverged {
                    max_degree: MAX_DEGREE,
                    tail: tail / maxc,
                    tol,
                });
            }
            n *= 2;
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.interval[0], self.interval[1])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    fn same_interval(&self, other: &Self) -> Result<()> {
        let tol = 1e-12 * (1.0 + self.interval[0].abs() + self.interval[1].abs());
        if (self.interval[0] - other.interval[0]).abs() > tol
            || (self.interval[1] - other.interval[1]).abs() > tol
        {
            return Err(Error::IntervalMismatch(
                self.interval[0],
                self.interval[1],
                other.interval[0],
                other.interval[1],
            ));
        }
        Ok(())
    }

    fn to_z(&self, x: f64) -> f64 {
        let (a, b) = (self.interval[0], self.interval[1]);
        (2.0 * x - a - b) / (b - a)
    }

    /// Drops trailing coefficients below `TRIM_REL * max|coeff|`.
    pub fn trim(&mut self) {
        let maxc = self.max_coeff();
        if maxc == 0.0 {
            self.coeffs.truncate(1);
            return;
        }
        // a non-finite scale would declare every coefficient negligible;
        // keep the coefficients so the overflow stays visible downstream
        if !maxc.is_finite() {
            return;
        }
        let cut = TRIM_REL * maxc;
        let mut keep = self.coeffs.len();
        while keep > 1 && self.coeffs[keep - 1].abs() < cut {
            keep -= 1;
        }
        self.coeffs.truncate(keep);
    }

    /// Clenshaw evaluation; errors outside `[a, b]` (no extrapolation).
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (a, b) = (self.interval[0], self.interval[1]);
        let slack = 1e-12 * (1.0 + a.abs() + b.abs());
        if x < a - slack || x > b + slack {
            return Err(Error::OutOfDomain { x, a, b });
        }
        Ok(clenshaw(&self.coeffs, self.to_z(x).clamp(-1.0, 1.0)))
    }

    /// Clenshaw evaluation with clamping; for internal hot paths where the
    /// argument is known to lie in the interval.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.to_z(x).clamp(-1.0, 1.0))
    }

    /// Exact coefficient recurrence for the derivative, same interval.
    pub fn differentiate(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return Self::zero(self.interval[0], self.interval[1]);
        }
        let c = &self.coeffs;
        let mut d = vec![0.0; n];
        let mut next2 = 0.0; // d[k+2]
        let mut next1 = 2.0 * n as f64 * c[n]; // d[n-1]
        d[n - 1] = next1;
        for k in (1..n).rev() {
            let val = next2 + 2.0 * k as f64 * c[k];
            d[k - 1] = val;
            next2 = next1;
            next1 = val;
        }
        d[0] *= 0.5;
        let scale = 2.0 / (self.interval[1] - self.interval[0]);
        for v in d.iter_mut() {
            *v *= scale;
        }
        let mut out = Self::from_coeffs(self.interval[0], self.interval[1], d);
        out.trim();
        out
    }

    /// Antiderivative vanishing at the left endpoint.
    pub fn integrate_cumulative(&self) -> Self {
        let n = self.degree();
        let c = &self.coeffs;
        let get = |k: usize| if k <= n { c[k] } else { 0.0 };
        let mut b = vec![0.0; n + 2];
        for k in 1..=n + 1 {
            let prev = if k == 1 { 2.0 * c[0] } else { get(k - 1) };
            b[k] = (prev - get(k + 1)) / (2.0 * k as f64);
        }
        let scale = 0.5 * (self.interval[1] - self.interval[0]);
        for v in b.iter_mut() {
            *v *= scale;
        }
        // fix the constant so the value at the left endpoint (z = -1) is zero
        let mut at_left = 0.0;
        for (k, &v) in b.iter().enumerate().skip(1) {
            at_left += if k % 2 == 0 { v } else { -v };
        }
        b[0] = -at_left;
        let mut out = Self::from_coeffs(self.interval[0], self.interval[1], b);
        out.trim();
        out
    }

    /// Clenshaw-Curtis value of the definite integral over `[a, b]`.
    pub fn integrate_definite(&self) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().step_by(2) {
            acc += 2.0 * c / (1.0 - (k * k) as f64);
        }
        acc * 0.5 * (self.interval[1] - self.interval[0])
    }

    /// sqrt of the integral of the square.
    pub fn l2_norm(&self) -> f64 {
        let sq = self.multiply(self).expect("same interval");
        let v = sq.integrate_definite();
        if !v.is_finite() {
            // overflow in the square must not clamp to zero via max(0.0)
            return f64::INFINITY;
        }
        v.max(0.0).sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.iter_mut() {
            *v *= c;
        }
        out.trim();
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_interval(other)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![0.0; len];
        for (i, v) in coeffs.iter_mut().enumerate() {
            *v = self.coeffs.get(i).copied().unwrap_or(0.0)
                + other.coeffs.get(i).copied().unwrap_or(0.0);
        }
        let mut out = Self::from_coeffs(self.interval[0], self.interval[1], coeffs);
        out.trim();
        Ok(out)
    }

    pub fn subtract(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Product, computed exactly on a grid of size deg_f + deg_g, then trimmed.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_interval(other)?;
        let n = (self.degree() + other.degree()).max(1);
        let pts = cheb_points(n, self.interval[0], self.interval[1]);
        let vals: Vec<f64> = pts
            .iter()
            .map(|&x| self.eval_clamped(x) * other.eval_clamped(x))
            .collect();
        let mut out = Self::from_coeffs(self.interval[0], self.interval[1], values_to_coeffs(&vals));
        out.trim();
        Ok(out)
    }

    /// Composition with a scalar function, re-interpolated adaptively.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::interpolate(
            |x| f(self.eval_clamped(x)),
            self.interval[0],
            self.interval[1],
            COMBINE_TOL,
        )
    }

    /// Synthetic division by (x - x0): returns (q, r) with
    /// self = (x - x0) * q + r.  The raw recurrence is only marginally
    /// stable when x0 sits at an interval endpoint, so one step of
    /// iterative refinement is applied to the quotient.
    pub fn deflate(&self, x0: f64) -> (Self, f64) {
        let (q, r) = self.deflate_raw(x0);
        if self.degree() < 2 {
            return (q, r);
        }
        let (a, b) = self.interval();
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let lin = Self::from_coeffs(a, b, vec![mid - x0, half]);
        let recon = lin.multiply(&q).and_then(|p| {
            p.add(&Self::constant(a, b, r))
        });
        let Ok(recon) = recon else { return (q, r) };
        let Ok(resid) = self.subtract(&recon) else { return (q, r) };
        let (dq, dr) = resid.deflate_raw(x0);
        match q.add(&dq) {
            Ok(refined) => (refined, r + dr),
            Err(_) => (q, r),
        }
    }

    fn deflate_raw(&self, x0: f64) -> (Self, f64) {
        let n = self.degree();
        let (a, b) = self.interval();
        if n == 0 {
            return (Self::zero(a, b), self.coeffs[0]);
        }
        let z0 = self.to_z(x0);
        let c = &self.coeffs;
        let mut q = vec![0.0; n];
        let r;
        if n == 1 {
            q[0] = c[1];
            r = c[0] + z0 * q[0];
        } else {
            q[n - 1] = 2.0 * c[n];
            for j in (2..n).rev() {
                q[j - 1] = 2.0 * (c[j] + z0 * q[j]) - if j + 1 < n { q[j + 1] } else { 0.0 };
            }
            q[0] = c[1] + z0 * q[1] - if n > 2 { 0.5 * q[2] } else { 0.0 };
            r = c[0] - 0.5 * q[1] + z0 * q[0];
        }
        // the quotient above is in z; x - x0 = (b - a)/2 * (z - z0)
        let scale = 2.0 / (b - a);
        let q: Vec<f64> = q.into_iter().map(|v| v * scale).collect();
        let mut out = Self::from_coeffs(a, b, q);
        out.trim();
        (out, r)
    }

    /// Coefficients of the equivalent polynomial in the monomial basis
    /// (index k multiplies x^k). Intended for low degrees; the conversion is
    /// ill-conditioned past degree ~30.
    pub fn monomial_coeffs(&self) -> Vec<f64> {
        let n = self.degree();
        let (a, b) = self.interval();
        let alpha = 2.0 / (b - a);
        let beta = -(a + b) / (b - a);
        // T_{k+1}(z) = 2 z T_k - T_{k-1} with z = alpha x + beta, carried
        // directly in x-monomials
        let mut out = vec![0.0; n + 1];
        let mut tkm1 = vec![1.0];
        let mut tk = vec![beta, alpha];
        out[0] += self.coeffs[0];
        if n >= 1 {
            for (i, &v) in tk.iter().enumerate() {
                out[i] += self.coeffs[1] * v;
            }
            for k in 2..=n {
                let mut next = vec![0.0; k + 1];
                for (i, &v) in tk.iter().enumerate() {
                    next[i] += 2.0 * beta * v;
                    next[i + 1] += 2.0 * alpha * v;
                }
                for (i, &v) in tkm1.iter().enumerate() {
                    next[i] -= v;
                }
                for (i, &v) in next.iter().enumerate() {
                    out[i] += self.coeffs[k] * v;
                }
                tkm1 = tk;
                tk = next;
            }
        }
        out
    }

    /// Largest absolute value over a sampling grid (endpoints included).
    pub fn max_abs(&self, samples: usize) -> f64 {
        let n = samples.max(self.coeffs.len() * 2).max(16);
        cheb_points(n, self.interval[0], self.interval[1])
            .iter()
            .fold(0.0f64, |m, &x| m.max(self.eval_clamped(x).abs()))
    }

    /// Smallest absolute value over a sampling grid.
    pub fn min_abs(&self, samples: usize) -> f64 {
        let n = samples.max(self.coeffs.len() * 2).max(16);
        cheb_points(n, self.interval[0], self.interval[1])
            .iter()
            .fold(f64::INFINITY, |m, &x| m.min(self.eval_clamped(x).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn interpolate_linear() {
        let f = ChebFun::interpolate(|x| 1.0 - x, 0.0, 1.0, 1e-13).unwrap();
        assert!(f.degree() <= 2);
        assert_abs_diff_eq!(f.eval(0.5).unwrap(), 0.5, epsilon = 1e-13);
    }

    #[test]
    fn interpolate_exp() {
        let f = ChebFun::interpolate(f64::exp, 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(f.eval(1.0).unwrap(), std::f64::consts::E, epsilon = 1e-12);
        let maxc = f.max_coeff();
        assert!(f.coeffs().last().unwrap().abs() < 1e-13 * maxc);
    }

    #[test]
    fn interpolate_sinc() {
        let f = ChebFun::interpolate(
            |x| if x == 0.0 { 1.0 } else { x.sin() / x },
            0.0,
            5.0,
            1e-13,
        )
        .unwrap();
        assert_abs_diff_eq!(f.eval(5.0).unwrap(), 5f64.sin() / 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.eval(5.0).unwrap(), -0.19178485493262577, epsilon = 1e-8);
    }

    #[test]
    fn evaluate_cases() {
        let sq = ChebFun::interpolate(|x| x * x, 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(sq.eval(0.3).unwrap(), 0.09, epsilon = 1e-13);
        let lin = ChebFun::interpolate(|x| 1.0 - x, 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(lin.eval(1.0).unwrap(), 0.0, epsilon = 1e-13);
        let c = ChebFun::constant(0.0, 1.0, 7.0);
        assert_abs_diff_eq!(c.eval(0.123).unwrap(), 7.0, epsilon = 1e-14);
        assert!(matches!(
            sq.eval(1.5),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn derivative_cases() {
        let sq = ChebFun::interpolate(|x| x * x, 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(sq.differentiate().eval(0.3).unwrap(), 0.6, epsilon = 1e-12);
        let lin = ChebFun::interpolate(|x| 1.0 - x, 0.0, 1.0, 1e-13).unwrap();
        let d = lin.differentiate();
        assert_abs_diff_eq!(d.eval(0.7).unwrap(), -1.0, epsilon = 1e-13);
        // second derivative of x(1-x)(2-x) = 2x - 3x^2 + x^3 is -6 + 6x
        let cubic =
            ChebFun::interpolate(|x| x * (1.0 - x) * (2.0 - x), 0.0, 1.0, 1e-13).unwrap();
        let dd = cubic.differentiate().differentiate();
        assert_abs_diff_eq!(dd.eval(0.0).unwrap(), -6.0, epsilon = 1e-10);
    }

    #[test]
    fn cumulative_integral_cases() {
        let one = ChebFun::constant(0.0, 1.0, 1.0);
        assert_abs_diff_eq!(one.integrate_cumulative().eval(0.7).unwrap(), 0.7, epsilon = 1e-13);
        let cubic =
            ChebFun::interpolate(|x| 2.0 * x - 3.0 * x * x + x * x * x, 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(cubic.integrate_cumulative().eval(1.0).unwrap(), 0.25, epsilon = 1e-12);
        let e = ChebFun::interpolate(f64::exp, 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(
            e.integrate_cumulative().eval(1.0).unwrap(),
            std::f64::consts::E - 1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn definite_integral_cases() {
        let cubic =
            ChebFun::interpolate(|x| x * (1.0 - x) * (2.0 - x), 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(cubic.integrate_definite(), 0.25, epsilon = 1e-13);
        let sq = ChebFun::interpolate(|x| (1.0 - x) * (1.0 - x), 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(sq.integrate_definite(), 1.0 / 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(ChebFun::zero(0.0, 1.0).integrate_definite(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn combine_and_map() {
        let lin = ChebFun::interpolate(|x| 1.0 - x, 0.0, 1.0, 1e-13).unwrap();
        let x = ChebFun::identity(0.0, 1.0);
        let s = lin.add(&x).unwrap();
        assert_abs_diff_eq!(s.eval(0.37).unwrap(), 1.0, epsilon = 1e-13);
        let e = x.map(|u| (-u).exp()).unwrap();
        assert_abs_diff_eq!(e.eval(1.0).unwrap(), (-1.0f64).exp(), epsilon = 1e-12);
        let p = x.multiply(&lin).unwrap();
        assert_abs_diff_eq!(p.eval(0.5).unwrap(), 0.25, epsilon = 1e-13);
        let other = ChebFun::identity(0.0, 2.0);
        assert!(x.add(&other).is_err());
    }

    #[test]
    fn l2_norms() {
        let lin = ChebFun::interpolate(|x| 1.0 - x, 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(lin.l2_norm(), 1.0 / 3.0f64.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(ChebFun::zero(0.0, 1.0).l2_norm(), 0.0, epsilon = 1e-15);
        let s = ChebFun::interpolate(|x| (std::f64::consts::PI * x).sin(), 0.0, 1.0, 1e-13).unwrap();
        assert_abs_diff_eq!(s.l2_norm(), 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn deflate_by_x() {
        // f(x) = x (1 - x); f / x = 1 - x
        let f = ChebFun::interpolate(|x| x * (1.0 - x), 0.0, 1.0, 1e-13).unwrap();
        let (q, r) = f.deflate(0.0);
        assert!(r.abs() < 1e-13);
        assert_abs_diff_eq!(q.eval(0.3).unwrap(), 0.7, epsilon = 1e-12);
        // remainder = value at x0
        let g = ChebFun::interpolate(|x| x * x + 1.0, -1.0, 2.0, 1e-13).unwrap();
        let (_, r) = g.deflate(0.5);
        assert_abs_diff_eq!(r, 1.25, epsilon = 1e-12);
    }

    #[test]
    fn monomial_conversion() {
        let f = ChebFun::interpolate(|x| x * x, 0.0, 1.0, 1e-13).unwrap();
        let m = f.monomial_coeffs();
        assert_abs_diff_eq!(m[0], 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(m[1], 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(m[2], 1.0, epsilon = 1e-13);
        let g = ChebFun::interpolate(|x| 1.0 + 2.0 * x - 0.5 * x * x * x, -1.0, 2.0, 1e-13)
            .unwrap();
        let m = g.monomial_coeffs();
        for (got, want) in m.iter().zip([1.0, 2.0, 0.0, -0.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn degree_cap_reported() {
        let err = ChebFun::interpolate(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-13).unwrap_err();
        assert!(matches!(err, Error::InterpolationDiverged { .. }));
    }
}
