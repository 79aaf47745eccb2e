//! Built-in problem catalog with exact solutions and reference constants.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::parse;
use crate::linsolve::BoundaryCondition;
use crate::recurrence::{LimitOverride, ODEProblem};

/// Constants (B, C) of the closed-form Bratu solution
/// y(x) = ln(2B²) − 2·ln cosh(Bx − C).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BratuConstants {
    pub b: f64,
    pub c: f64,
}

/// Closed-form Bratu solution for one constant pair.
pub fn bratu_exact(k: BratuConstants) -> impl Fn(f64) -> f64 + Send + Sync {
    move |x: f64| (2.0 * k.b * k.b).ln() - 2.0 * (k.b * x - k.c).cosh().ln()
}

/// The changed-variable form z = e^{−y} of the same solution.
pub fn bratu_z_exact(k: BratuConstants) -> impl Fn(f64) -> f64 + Send + Sync {
    move |x: f64| {
        let ch = (k.b * x - k.c).cosh();
        ch * ch / (2.0 * k.b * k.b)
    }
}

fn bratu_b_equation(y0: f64, y1: f64, b: f64) -> f64 {
    let s = b.sinh();
    let sh = (0.5 * b).sinh();
    let diff = (-0.5 * y1).exp() - (-0.5 * y0).exp();
    let term = 4.0 * (-0.5 * (y0 + y1)).exp() * sh * sh - diff * diff;
    s * s - 2.0 * b * b * term
}

/// All B > 0 solving the boundary-matching equation for the Bratu BVP with
/// y(0) = ȳ₀, y(1) = ȳ₁, each paired with the matching C.  Near-tangent
/// root pairs (the critical boundary value) merge to their midpoint.
pub fn bratu_constants(y0: f64, y1: f64) -> Vec<BratuConstants> {
    let f = |b: f64| bratu_b_equation(y0, y1, b);
    let n = 6000usize;
    let (la, lb) = (1e-2f64.ln(), 50f64.ln());
    let mut roots: Vec<f64> = Vec::new();
    let mut prev = {
        let b = la.exp();
        (b, f(b))
    };
    for i in 1..=n {
        let b = (la + (lb - la) * i as f64 / n as f64).exp();
        let v = f(b);
        if prev.1 * v < 0.0 {
            let (mut lo, mut hi) = (prev.0, b);
            let mut flo = prev.1;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = (b, v);
    }
    // merge near-tangent pairs (double roots split by rounding)
    let mut merged: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < roots.len() {
        if i + 1 < roots.len() && (roots[i + 1] - roots[i]) < 0.05 * roots[i] {
            merged.push(0.5 * (roots[i] + roots[i + 1]));
            i += 2;
        } else {
            merged.push(roots[i]);
            i += 1;
        }
    }
    merged
        .into_iter()
        .filter_map(|b| {
            let ch0 = 2f64.sqrt() * (-0.5 * y0).exp() * b;
            if ch0 < 1.0 {
                return None;
            }
            let c_abs = (ch0 + (ch0 * ch0 - 1.0).sqrt()).ln();
            let target = 2f64.sqrt() * (-0.5 * y1).exp() * b;
            let err = |c: f64| ((b - c).cosh() - target).abs();
            let c = if err(c_abs) <= err(-c_abs) { c_abs } else { -c_abs };
            Some(BratuConstants { b, c })
        })
        .collect()
}

/// One catalog problem: a named template with default parameter values.
pub struct CatalogEntry {
    pub name: &'static str,
    pub defaults: &'static [(&'static str, f64)],
    pub notes: &'static str,
    builder: fn(&HashMap<String, f64>) -> Result<ODEProblem>,
}

impl CatalogEntry {
    /// Instantiates the problem with defaults overridden by `overrides`.
    pub fn build(&self, overrides: &HashMap<String, f64>) -> Result<Arc<ODEProblem>> {
        let mut params: HashMap<String, f64> = self
            .defaults
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        for (k, v) in overrides {
            if !params.contains_key(k) {
                return Err(Error::Invalid(format!(
                    "problem `{}` has no parameter `{k}`",
                    self.name
                )));
            }
            params.insert(k.clone(), *v);
        }
        Ok(Arc::new((self.builder)(&params)?))
    }
}

fn p(params: &HashMap<String, f64>, key: &str) -> f64 {
    params[key]
}

fn build_example1(params: &HashMap<String, f64>) -> Result<ODEProblem> {
    let xi = p(params, "xi");
    let sq = xi.sqrt();
    Ok(ODEProblem::new(
        parse("xi")?,
        parse("0 - y")?,
        BoundaryCondition::bvp(0.0, 1.0, 1.0, 0.0),
    )
    .with_param("xi", xi)
    .with_exact(move |x: f64| {
        ((-x / sq).exp() - ((x - 2.0) / sq).exp()) / (1.0 - (-2.0 / sq).exp())
    }))
}

fn build_bratu(params: &HashMap<String, f64>) -> Result<ODEProblem> {
    let (y0, y1) = (p(params, "y0"), p(params, "y1"));
    let mut prob = ODEProblem::new(
        parse("exp(0 - y)")?,
        parse("1")?,
        BoundaryCondition::bvp(0.0, 1.0, y0, y1),
    );
    if let Some(&k) = bratu_constants(y0, y1).first() {
        prob = prob.with_exact(bratu_exact(k));
    }
    Ok(prob)
}

fn build_bratu_z(params: &HashMap<String, f64>) -> Result<ODEProblem> {
    let (y0, y1) = (p(params, "y0"), p(params, "y1"));
    let mut prob = ODEProblem::new(
        parse("y")?,
        parse("0 - y - dy^2")?,
        BoundaryCondition::bvp(0.0, 1.0, (-y0).exp(), (-y1).exp()),
    );
    if let Some(&k) = bratu_constants(y0, y1).first() {
        prob = prob.with_exact(bratu_z_exact(k));
    }
    Ok(prob)
}

fn build_example3(params: &HashMap<String, f64>) -> Result<ODEProblem> {
    let xi = p(params, "xi");
    Ok(ODEProblem::new(
        parse("1")?,
        parse("xi * (dy + y^2)")?,
        BoundaryCondition::bvp(0.0, 1.0, 0.0, 1.0),
    )
    .with_param("xi", xi))
}

fn lane_emden_exact(m: f64) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    if m == 0.0 {
        Some(Box::new(|x: f64| 1.0 - x * x / 6.0))
    } else if m == 1.0 {
        Some(Box::new(|x: f64| {
            if x.abs() < 1e-8 {
                1.0 - x * x / 6.0
            } else {
                x.sin() / x
            }
        }))
    } else if m == 5.0 {
        Some(Box::new(|x: f64| 1.0 / (1.0 + x * x / 3.0).sqrt()))
    } else {
        None
    }
}

fn build_lane_emden(params: &HashMap<String, f64>) -> Result<ODEProblem> {
    let (m, t) = (p(params, "m"), p(params, "t"));
    let mut prob = ODEProblem::new(
        parse("1")?,
        parse("2*dy/x + y^m")?,
        BoundaryCondition::ivp(0.0, t, 1.0, 0.0),
    )
    .with_param("m", m)
    // y'(0) = 0 makes 2y'/x removable: lim_{x→0} 2y'/x = 2y''(0)
    .with_limit_override(LimitOverride {
        x: 0.0,
        g: None,
        h: Some(parse("2*ddy + y^m")?),
    });
    if let Some(f) = lane_emden_exact(m) {
        prob = prob.with_exact(move |x| f(x));
    }
    Ok(prob)
}

fn build_lane_emden_u(params: &HashMap<String, f64>) -> Result<ODEProblem> {
    let (m, t) = (p(params, "m"), p(params, "t"));
    // the exponent must fold to a constant, so it is formatted in; for
    // integer m ≥ 2 the x·(u/x)^m form is preferred: it deflates the
    // monomial-pure series coefficients of u once each instead of pushing
    // the x^{1−m} division through the convolved power, which loses
    // accuracy in the ε hierarchy
    let h_src = if m >= 2.0 && m.fract() == 0.0 {
        format!("x * (y / x)^({})", m as i64)
    } else {
        format!("x^({}) * y^m", 1.0 - m)
    };
    let mut prob = ODEProblem::new(
        parse("1")?,
        parse(&h_src)?,
        BoundaryCondition::ivp(0.0, t, 0.0, 1.0),
    )
    .with_param("m", m)
    // u(0) = 0 makes x^{1−m}u^m removable at x = 0: the limit is 0
    .with_limit_override(LimitOverride {
        x: 0.0,
        g: None,
        h: Some(parse("0")?),
    });
    if let Some(f) = lane_emden_exact(m) {
        prob = prob.with_exact(move |x| x * f(x));
    }
    Ok(prob)
}

fn build_linear(_params: &HashMap<String, f64>) -> Result<ODEProblem> {
    // y'' + 2y' + y = x with y(0) = y(1) = 0
    let e = std::f64::consts::E;
    Ok(ODEProblem::new(
        parse("1")?,
        parse("2*dy + y - x")?,
        BoundaryCondition::bvp(0.0, 1.0, 0.0, 0.0),
    )
    .with_exact(move |x: f64| (2.0 + (e - 2.0) * x) * (-x).exp() + x - 2.0))
}

/// The seven built-in problems.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "example1",
            defaults: &[("xi", 0.1)],
            notes: "ξy'' − y = 0, y(0)=1, y(1)=0; exact exponential pair",
            builder: build_example1,
        },
        CatalogEntry {
            name: "bratu",
            defaults: &[("y0", 1.0), ("y1", 1.0)],
            notes: "e^{−y}y'' + 1 = 0; exact via (B, C) constants (first root)",
            builder: build_bratu,
        },
        CatalogEntry {
            name: "bratu_z",
            defaults: &[("y0", 1.0), ("y1", 1.0)],
            notes: "z = e^{−y}: zz'' − z − z'² = 0; exact cosh²(Bx−C)/(2B²)",
            builder: build_bratu_z,
        },
        CatalogEntry {
            name: "example3",
            defaults: &[("xi", 1.0)],
            notes: "y'' + ξ(y' + y²) = 0, y(0)=0, y(1)=1; no exact solution",
            builder: build_example3,
        },
        CatalogEntry {
            name: "lane_emden",
            defaults: &[("m", 0.0), ("t", 5.0)],
            notes: "y'' + 2y'/x + y^m = 0, y(0)=1, y'(0)=0; exact for m ∈ {0,1,5}; \
                    registers the x=0 limit override lim 2y'/x = 2y''(0)",
            builder: build_lane_emden,
        },
        CatalogEntry {
            name: "lane_emden_u",
            defaults: &[("m", 0.0), ("t", 5.0)],
            notes: "u = xy: u'' + x^{1−m}u^m = 0, u(0)=0, u'(0)=1",
            builder: build_lane_emden_u,
        },
        CatalogEntry {
            name: "linear",
            defaults: &[],
            notes: "sanity: y'' + 2y' + y = x, y(0)=y(1)=0; closed-form exact",
            builder: build_linear,
        },
    ]
}

/// Catalog lookup by name.
pub fn entry(name: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::ChebFun;
    use crate::metrics::d1;
    use approx::assert_abs_diff_eq;

    fn no_overrides() -> HashMap<String, f64> {
        HashMap::new()
    }

    #[test]
    fn bratu_constants_reference_values() {
        let ks = bratu_constants(1.0, 1.0);
        assert_eq!(ks.len(), 2, "{ks:?}");
        assert_abs_diff_eq!(ks[0].b, 1.51812, epsilon = 5e-5);
        assert_abs_diff_eq!(ks[1].b, 3.5675, epsilon = 5e-4);
        for k in &ks {
            assert!(bratu_b_equation(1.0, 1.0, k.b).abs() <= 1e-12 * k.b.sinh().powi(2));
            // boundary reconstruction
            let y = bratu_exact(*k);
            assert_abs_diff_eq!(y(0.0), 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(y(1.0), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn bratu_constants_critical_and_empty() {
        let ks = bratu_constants(1.2567, 1.2567);
        assert_eq!(ks.len(), 1, "{ks:?}");
        assert_abs_diff_eq!(ks[0].b, 2.39936, epsilon = 5e-2);
        assert!(bratu_constants(2.0, 2.0).is_empty());
    }

    #[test]
    fn symmetric_case_reduces() {
        // roots of cosh(B/2) = √2·B·e^{−ȳ/2} must coincide
        let ybar: f64 = 1.0;
        let g = |b: f64| (0.5 * b).cosh() - 2f64.sqrt() * b * (-0.5 * ybar).exp();
        let mut direct = Vec::new();
        let mut prev = (0.01, g(0.01));
        for i in 1..=5000 {
            let b = 0.01 + 10.0 * i as f64 / 5000.0;
            let v = g(b);
            if prev.1 * v < 0.0 {
                let (mut lo, mut hi, mut flo) = (prev.0, b, prev.1);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if flo * g(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = g(mid);
                    }
                }
                direct.push(0.5 * (lo + hi));
            }
            prev = (b, v);
        }
        let ks = bratu_constants(ybar, ybar);
        assert_eq!(direct.len(), ks.len());
        for (a, k) in direct.iter().zip(&ks) {
            assert_abs_diff_eq!(*a, k.b, epsilon = 1e-9);
        }
    }

    #[test]
    fn catalog_has_seven_entries_and_lookup_works() {
        let cat = catalog();
        assert_eq!(cat.len(), 7);
        assert!(entry("bratu").is_some());
        assert!(entry("nonexistent").is_none());
        // unknown parameter rejected
        let mut bad = HashMap::new();
        bad.insert("nope".to_string(), 1.0);
        assert!(entry("example1").unwrap().build(&bad).is_err());
    }

    #[test]
    fn exact_solutions_have_tiny_d1() {
        let mut cases: Vec<(String, HashMap<String, f64>)> = vec![
            ("example1".into(), no_overrides()),
            ("bratu".into(), no_overrides()),
            ("bratu_z".into(), no_overrides()),
            ("linear".into(), no_overrides()),
        ];
        for m in [0.0, 1.0, 5.0] {
            for name in ["lane_emden", "lane_emden_u"] {
                let mut o = HashMap::new();
                o.insert("m".to_string(), m);
                cases.push((name.to_string(), o));
            }
        }
        for (name, overrides) in cases {
            let prob = entry(&name).unwrap().build(&overrides).unwrap();
            let exact = prob.exact.clone().expect("exact attached");
            let (a, b) = prob.interval();
            let y = ChebFun::interpolate(&|x: f64| exact(x), a, b, 1e-15).unwrap();
            let d = d1(&prob, &y).unwrap();
            assert!(d <= 1e-9, "{name} ({overrides:?}): d1 = {d:e}");
            // boundary data
            assert_abs_diff_eq!(exact(prob.bc.x_left), prob.bc.value_left, epsilon = 1e-12);
            if prob.bc.kind == crate::linsolve::BcKind::Bvp {
                assert_abs_diff_eq!(exact(prob.bc.x_right), prob.bc.value_right, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn lane_emden_reference_points() {
        let mut o = HashMap::new();
        o.insert("m".to_string(), 0.0);
        let prob = entry("lane_emden").unwrap().build(&o).unwrap();
        let exact = prob.exact.clone().unwrap();
        assert_abs_diff_eq!(exact(1.0), 5.0 / 6.0, epsilon = 1e-14);

        o.insert("m".to_string(), 5.0);
        let prob = entry("lane_emden").unwrap().build(&o).unwrap();
        let exact = prob.exact.clone().unwrap();
        assert_abs_diff_eq!(exact(2.0), 0.65465367, epsilon = 1e-8);
    }
}
