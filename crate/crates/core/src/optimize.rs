//! Parameter-space minimization of the residual distances, multi-minimum
//! tracking across orders, asymptotic fits, and the derived predictors
//! (critical family parameter, required order for a target precision).
//!
//! The landscapes are one- or two-dimensional, scanned on a grid and
//! polished with golden-section coordinate descent; infeasible parameter
//! points (resonant operator, singular lift, diverging interpolation) are
//! treated as +∞ so the divergence region is invisible to the minimizer.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsolve::LinearParams;
use crate::metrics::{distance, DistanceKind};
use crate::recurrence::{expand, ODEProblem};

/// Relative parameter tolerance of the golden-section polish.
const POLISH_REL_TOL: f64 = 1e-8;

/// Relative parameter threshold for matching minima across orders.
const MATCH_REL: f64 = 0.2;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    P0,
    P1,
    P2,
    P3,
    Epsilon,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::P0 => "p0",
            Axis::P1 => "p1",
            Axis::P2 => "p2",
            Axis::P3 => "p3",
            Axis::Epsilon => "eps",
        }
    }

    fn get(&self, p: &LinearParams) -> f64 {
        match self {
            Axis::P0 => p.p0,
            Axis::P1 => p.p1,
            Axis::P2 => p.p2,
            Axis::P3 => p.p3,
            Axis::Epsilon => p.epsilon,
        }
    }

    fn set(&self, p: &mut LinearParams, v: f64) {
        match self {
            Axis::P0 => p.p0 = v,
            Axis::P1 => p.p1 = v,
            Axis::P2 => p.p2 = v,
            Axis::P3 => p.p3 = v,
            Axis::Epsilon => p.epsilon = v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub log: bool,
}

impl AxisGrid {
    fn values(&self) -> Vec<f64> {
        let n = self.points.max(2);
        if self.log {
            let (la, lb) = (self.lo.log10(), self.hi.log10());
            (0..n)
                .map(|i| 10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64))
                .collect()
        } else {
            (0..n)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
                .collect()
        }
    }

    fn to_u(&self, v: f64) -> f64 {
        if self.log {
            v.log10()
        } else {
            v
        }
    }

    fn from_u(&self, u: f64) -> f64 {
        if self.log {
            10f64.powf(u)
        } else {
            u
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AxisSpec {
    Fixed(f64),
    Search(AxisGrid),
}

/// Which parameters are fixed and which are scanned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub p0: AxisSpec,
    pub p1: AxisSpec,
    pub p2: AxisSpec,
    pub p3: AxisSpec,
    pub epsilon: AxisSpec,
}

impl ParamSpec {
    /// Default restricted search: p0 alone on 400 log-spaced
    /// points in [1e−3, 10] scaled by the interval length, ε = 1.
    pub fn restricted_default(interval_length: f64) -> Self {
        Self {
            p0: AxisSpec::Search(AxisGrid {
                lo: 1e-3 * interval_length,
                hi: 10.0 * interval_length,
                points: 400,
                log: true,
            }),
            p1: AxisSpec::Fixed(0.0),
            p2: AxisSpec::Fixed(0.0),
            p3: AxisSpec::Fixed(0.0),
            epsilon: AxisSpec::Fixed(1.0),
        }
    }

    /// Strong-conjecture variant: additionally searches ε on 40 linear
    /// points in [0.1, 2].
    pub fn strong_default(interval_length: f64) -> Self {
        Self {
            epsilon: AxisSpec::Search(AxisGrid {
                lo: 0.1,
                hi: 2.0,
                points: 40,
                log: false,
            }),
            ..Self::restricted_default(interval_length)
        }
    }

    fn spec_of(&self, axis: Axis) -> AxisSpec {
        match axis {
            Axis::P0 => self.p0,
            Axis::P1 => self.p1,
            Axis::P2 => self.p2,
            Axis::P3 => self.p3,
            Axis::Epsilon => self.epsilon,
        }
    }

    fn searched(&self) -> Vec<(Axis, AxisGrid)> {
        [Axis::P0, Axis::P1, Axis::P2, Axis::P3, Axis::Epsilon]
            .into_iter()
            .filter_map(|a| match self.spec_of(a) {
                AxisSpec::Search(g) => Some((a, g)),
                AxisSpec::Fixed(_) => None,
            })
            .collect()
    }

    fn base_point(&self) -> LinearParams {
        let fixed = |s: AxisSpec| match s {
            AxisSpec::Fixed(v) => v,
            AxisSpec::Search(g) => g.lo,
        };
        LinearParams::new(
            fixed(self.p0),
            fixed(self.p1),
            fixed(self.p2),
            fixed(self.p3),
            fixed(self.epsilon),
        )
    }
}

/// One local minimum of the distance landscape at a fixed order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimaRecord {
    pub n: usize,
    pub params: LinearParams,
    /// (axis name, polished value) for each searched axis, in spec order.
    pub searched: Vec<(String, f64)>,
    pub kind: DistanceKind,
    pub d_star: f64,
    /// Span between the two grid neighbors of the seeding cell along the
    /// first searched axis.
    pub basin_width: f64,
}

struct Objective<'a> {
    problem: &'a Arc<ODEProblem>,
    n: usize,
    kind: DistanceKind,
}

impl Objective<'_> {
    fn eval(&self, p: &LinearParams) -> Option<f64> {
        if p.p0 == 0.0 {
            return None;
        }
        let e = expand(self.problem, *p, self.n).ok()?;
        let y = e.partial_sum(self.n, p.epsilon);
        let d = distance(self.problem, &y, self.kind).ok()?;
        d.is_finite().then_some(d)
    }

    /// Evaluates a whole row that shares the non-ε parameters, reusing the
    /// expansion when the inner axis is ε.
    fn eval_eps_row(&self, p: &LinearParams, eps_values: &[f64]) -> Vec<Option<f64>> {
        if p.p0 == 0.0 {
            return vec![None; eps_values.len()];
        }
        let Ok(e) = expand(self.problem, *p, self.n) else {
            return vec![None; eps_values.len()];
        };
        eps_values
            .iter()
            .map(|&eps| {
                let y = e.partial_sum(self.n, eps);
                distance(self.problem, &y, self.kind)
                    .ok()
                    .filter(|d| d.is_finite())
            })
            .collect()
    }
}

fn golden_section<F: Fn(f64) -> Option<f64>>(
    f: &F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64) {
    let val = |x: f64| f(x).unwrap_or(f64::INFINITY);
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = val(x1);
    let mut f2 = val(x2);
    while (b - a).abs() > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = val(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = val(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn eval_grid(
    obj: &Objective,
    base: &LinearParams,
    axes: &[(Axis, AxisGrid)],
    values: &[Vec<f64>],
) -> Vec<Vec<Option<f64>>> {
    // arrange ε (expansion-independent) as the inner axis when present
    let eps_inner = axes.len() == 2 && axes[1].0 == Axis::Epsilon;
    if axes.len() == 1 {
        if axes[0].0 == Axis::Epsilon {
            let row = obj.eval_eps_row(base, &values[0]);
            row.into_iter().map(|v| vec![v]).collect()
        } else {
            values[0]
                .par_iter()
                .map(|&v| {
                    let mut p = *base;
                    axes[0].0.set(&mut p, v);
                    vec![obj.eval(&p)]
                })
                .collect()
        }
    } else {
        values[0]
            .par_iter()
            .map(|&v0| {
                let mut p = *base;
                axes[0].0.set(&mut p, v0);
                if eps_inner {
                    obj.eval_eps_row(&p, &values[1])
                } else {
                    values[1]
                        .iter()
                        .map(|&v1| {
                            let mut q = p;
                            axes[1].0.set(&mut q, v1);
                            obj.eval(&q)
                        })
                        .collect()
                }
            })
            .collect()
    }
}

/// Golden-section coordinate descent seeded at a grid cell, bracketed by
/// the neighboring cells (clamped at the grid edges), cycling until the
/// point stops moving.
fn polish_cell(
    obj: &Objective,
    base: &LinearParams,
    axes: &[(Axis, AxisGrid)],
    values: &[Vec<f64>],
    cell: (usize, usize),
    seed_val: f64,
) -> (LinearParams, f64) {
    let (i, j) = cell;
    let mut p = *base;
    axes[0].0.set(&mut p, values[0][i]);
    if axes.len() == 2 {
        axes[1].0.set(&mut p, values[1][j]);
    }
    let mut best = seed_val;

    let mut brackets: Vec<(f64, f64)> = Vec::new();
    for (k, (_, g)) in axes.iter().enumerate() {
        let idx = if k == 0 { i } else { j };
        let vs = &values[k];
        let lo = vs[idx.saturating_sub(1)];
        let hi = vs[(idx + 1).min(vs.len() - 1)];
        brackets.push((g.to_u(lo), g.to_u(hi)));
    }
    let init_widths: Vec<f64> = brackets.iter().map(|(lo, hi)| hi - lo).collect();
    let max_cycles = if axes.len() == 1 { 4 } else { 100 };
    for _ in 0..max_cycles {
        let mut moved: f64 = 0.0;
        for (k, (axis, g)) in axes.iter().enumerate() {
            let (lo, hi) = brackets[k];
            if hi - lo <= 0.0 {
                continue;
            }
            let tol = POLISH_REL_TOL * (1.0 + g.to_u(axis.get(&p)).abs());
            let f = |u: f64| {
                let mut q = p;
                axis.set(&mut q, g.from_u(u));
                obj.eval(&q)
            };
            let (u_star, f_star) = golden_section(&f, lo, hi, tol);
            let prev = g.to_u(axis.get(&p));
            if f_star <= best {
                best = f_star;
                axis.set(&mut p, g.from_u(u_star));
                moved = moved.max((u_star - prev).abs() / (1.0 + prev.abs()));
            }
            // trust-region style bracket: re-expand when the minimizer
            // lands near an edge so diagonal valleys can be followed, but
            // never beyond the original grid cell to keep polish local
            let c = g.to_u(axis.get(&p));
            let width = hi - lo;
            let near_edge = (u_star - lo).min(hi - u_star) < 0.2 * width;
            let half = if near_edge { width } else { 0.25 * width }
                .min(init_widths[k])
                .max(100.0 * tol);
            brackets[k] = (c - half, c + half);
        }
        if moved < POLISH_REL_TOL {
            break;
        }
    }
    (p, best)
}

/// Global best point of the grid (polished), regardless of whether it is a
/// strict interior local minimum.  Used by the marcher, whose landscapes
/// may be flat or edge-dominated.
pub fn scan_best(
    problem: &Arc<ODEProblem>,
    n: usize,
    spec: &ParamSpec,
    kind: DistanceKind,
) -> Result<MinimaRecord> {
    let axes = spec.searched();
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::Invalid(format!(
            "grid scan supports 1 or 2 searched parameters, got {}",
            axes.len()
        )));
    }
    let obj = Objective { problem, n, kind };
    let base = spec.base_point();
    let values: Vec<Vec<f64>> = axes.iter().map(|(_, g)| g.values()).collect();
    let grid = eval_grid(&obj, &base, &axes, &values);

    let mut best_cell: Option<((usize, usize), f64)> = None;
    for (i, row) in grid.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if let Some(v) = v {
                if best_cell.map_or(true, |(_, b)| *v < b) {
                    best_cell = Some(((i, j), *v));
                }
            }
        }
    }
    let (cell, seed) = best_cell.ok_or(Error::EmptyFeasibleGrid)?;
    let (p, d_star) = polish_cell(&obj, &base, &axes, &values, cell, seed);
    let basin_vs = &values[0];
    let basin = (basin_vs[(cell.0 + 1).min(basin_vs.len() - 1)]
        - basin_vs[cell.0.saturating_sub(1)])
    .abs();
    Ok(MinimaRecord {
        n,
        params: p,
        searched: axes
            .iter()
            .map(|(a, _)| (a.name().to_string(), a.get(&p)))
            .collect(),
        kind,
        d_star,
        basin_width: basin,
    })
}

/// Scans the grid, finds strict interior local minima, polishes each by
/// golden-section coordinate descent.
pub fn scan_minima(
    problem: &Arc<ODEProblem>,
    n: usize,
    spec: &ParamSpec,
    kind: DistanceKind,
) -> Result<Vec<MinimaRecord>> {
    let axes = spec.searched();
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::Invalid(format!(
            "grid scan supports 1 or 2 searched parameters, got {}",
            axes.len()
        )));
    }
    let obj = Objective { problem, n, kind };
    let base = spec.base_point();
    let values: Vec<Vec<f64>> = axes.iter().map(|(_, g)| g.values()).collect();
    let grid = eval_grid(&obj, &base, &axes, &values);
    if grid.iter().flatten().all(|v| v.is_none()) {
        return Err(Error::EmptyFeasibleGrid);
    }

    // strict interior local minima
    let (ni, nj) = (grid.len(), grid[0].len());
    let mut seeds: Vec<(usize, usize)> = Vec::new();
    for i in 0..ni {
        for j in 0..nj {
            let Some(c) = grid[i][j] else { continue };
            if (ni > 1 && (i == 0 || i == ni - 1)) || (nj > 1 && (j == 0 || j == nj - 1)) {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= ni as i64 || jj >= nj as i64 {
                        continue;
                    }
                    if let Some(v) = grid[ii as usize][jj as usize] {
                        if v <= c {
                            is_min = false;
                        }
                    }
                }
            }
            if is_min {
                seeds.push((i, j));
            }
        }
    }

    let mut out = Vec::new();
    for (i, j) in seeds {
        let (p, best) = polish_cell(&obj, &base, &axes, &values, (i, j), grid[i][j].unwrap());
        let basin = (values[0][(i + 1).min(ni - 1)] - values[0][i.saturating_sub(1)]).abs();
        out.push(MinimaRecord {
            n,
            params: p,
            searched: axes
                .iter()
                .map(|(a, _)| (a.name().to_string(), a.get(&p)))
                .collect(),
            kind,
            d_star: best,
            basin_width: basin,
        });
    }
    // deterministic order: by first searched axis value
    out.sort_by(|a, b| a.searched[0].1.total_cmp(&b.searched[0].1));
    Ok(out)
}

/// A family of minima matched across orders with period `period`,
/// residue class `residue`, and intra-class index `index` (1-based).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub period: usize,
    pub residue: usize,
    pub index: usize,
    pub members: Vec<MinimaRecord>,
}

impl SequenceRecord {
    pub fn id(&self) -> (usize, usize) {
        (self.residue, self.index)
    }
}

fn rel_dist(a: &MinimaRecord, b: &MinimaRecord) -> f64 {
    a.searched
        .iter()
        .zip(&b.searched)
        .map(|((_, x), (_, y))| (x - y).abs() / (0.5 * (x.abs() + y.abs()) + 1e-300))
        .fold(0.0f64, f64::max)
}

/// Matches minima across orders into sequences. The period is inferred as
/// the smallest k making the minima count constant within every residue
/// class; members are matched to the nearest open sequence within 20%
/// relative parameter distance.
pub fn track_sequences(records: &[Vec<MinimaRecord>]) -> Vec<SequenceRecord> {
    let nonempty: Vec<&Vec<MinimaRecord>> = records.iter().filter(|r| !r.is_empty()).collect();
    if nonempty.is_empty() {
        return Vec::new();
    }
    let period = (1..=4)
        .find(|&k| {
            let mut per_class: HashMap<usize, usize> = HashMap::new();
            nonempty.iter().all(|recs| {
                let class = recs[0].n % k;
                let count = recs.len();
                *per_class.entry(class).or_insert(count) == count
            })
        })
        .unwrap_or(1);

    let mut sequences: Vec<SequenceRecord> = Vec::new();
    for recs in &nonempty {
        let class = recs[0].n % period;
        for rec in recs.iter() {
            let best = sequences
                .iter_mut()
                // at most one member per order in a sequence
                .filter(|s| s.residue == class && s.members.last().unwrap().n < rec.n)
                .map(|s| {
                    let d = rel_dist(s.members.last().unwrap(), rec);
                    (d, s)
                })
                .filter(|(d, _)| *d < MATCH_REL)
                .min_by(|a, b| a.0.total_cmp(&b.0));
            match best {
                Some((_, seq)) => seq.members.push(rec.clone()),
                None => sequences.push(SequenceRecord {
                    period,
                    residue: class,
                    index: 0,
                    members: vec![rec.clone()],
                }),
            }
        }
    }
    // index within each class by the first member's leading parameter
    let mut by_class: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, s) in sequences.iter().enumerate() {
        by_class.entry(s.residue).or_default().push(i);
    }
    for idxs in by_class.values() {
        let mut sorted = idxs.clone();
        sorted.sort_by(|&a, &b| {
            sequences[a].members[0].searched[0]
                .1
                .total_cmp(&sequences[b].members[0].searched[0].1)
        });
        for (rank, &i) in sorted.iter().enumerate() {
            sequences[i].index = rank + 1;
        }
    }
    sequences.sort_by_key(|s| (s.residue, s.index));
    sequences
}

/// One linear least-squares fit: coefficients, standard errors, and whether
/// the basis had to be reduced for rank reasons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub coeffs: Vec<f64>,
    pub errors: Vec<f64>,
    pub reduced: bool,
}

fn linear_fit(rows: &[Vec<f64>], ys: &[f64]) -> Result<FitResult> {
    let mut k = rows[0].len();
    let m = rows.len();
    let mut reduced = false;
    loop {
        if k == 0 {
            return Err(Error::RankDeficientFit(0));
        }
        let x = nalgebra::DMatrix::from_fn(m, k, |i, j| rows[i][j]);
        let y = nalgebra::DVector::from_column_slice(ys);
        let xtx = x.transpose() * &x;
        let xty = x.transpose() * &y;
        let svd = xtx.clone().svd(true, true);
        let smax = svd.singular_values.max();
        if svd.singular_values.min() <= 1e-12 * smax {
            k -= 1;
            reduced = true;
            continue;
        }
        let beta = svd.solve(&xty, 0.0).expect("svd solve");
        let resid = &y - &x * &beta;
        let dof = m.saturating_sub(k);
        let sigma2 = if dof > 0 {
            resid.norm_squared() / dof as f64
        } else {
            0.0
        };
        let cov = xtx.try_inverse().expect("invertible by rank check");
        let errors: Vec<f64> = (0..k).map(|j| (sigma2 * cov[(j, j)]).max(0.0).sqrt()).collect();
        return Ok(FitResult {
            coeffs: beta.iter().copied().collect(),
            errors,
            reduced,
        });
    }
}

/// Asymptotic fits of one sequence: per searched parameter
/// v*(n) = a0 + a1/n + a2/n² + a3/n³, and
/// log10 d*(n) = b0 n + b1 + b2/n + b3/n², with δ = 10^{b0}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub param_fits: Vec<(String, FitResult)>,
    pub distance_fit: FitResult,
    pub delta: f64,
}

pub fn fit_asymptotics(seq: &SequenceRecord, window: (usize, usize)) -> Result<AsymptoticFit> {
    let members: Vec<&MinimaRecord> = seq
        .members
        .iter()
        .filter(|m| m.n >= window.0 && m.n <= window.1)
        .collect();
    if members.len() < 5 {
        return Err(Error::Invalid(format!(
            "asymptotic fit needs ≥ 5 members in the window, got {}",
            members.len()
        )));
    }
    let ns: Vec<f64> = members.iter().map(|m| m.n as f64).collect();

    let mut param_fits = Vec::new();
    for (j, (name, _)) in members[0].searched.iter().enumerate() {
        let rows: Vec<Vec<f64>> = ns
            .iter()
            .map(|&n| vec![1.0, 1.0 / n, 1.0 / (n * n), 1.0 / (n * n * n)])
            .collect();
        let ys: Vec<f64> = members.iter().map(|m| m.searched[j].1).collect();
        param_fits.push((name.clone(), linear_fit(&rows, &ys)?));
    }

    let rows: Vec<Vec<f64>> = ns
        .iter()
        .map(|&n| vec![n, 1.0, 1.0 / n, 1.0 / (n * n)])
        .collect();
    let ys: Vec<f64> = members.iter().map(|m| m.d_star.log10()).collect();
    let distance_fit = linear_fit(&rows, &ys)?;
    let delta = 10f64.powf(distance_fit.coeffs[0]);
    Ok(AsymptoticFit {
        param_fits,
        distance_fit,
        delta,
    })
}

/// Outcome of the critical-parameter estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CriticalEstimate {
    Root(f64),
    /// m(ξ) kept one sign over the sampled list; the root, if any, lies
    /// beyond the given bound.
    OneSidedBound { beyond: f64 },
}

/// Fits a cubic through the per-family decay slopes m(ξ) and locates
/// m(ξ_c) = 0 on [min ξ, max ξ + 0.5].
pub fn critical_parameter(xis: &[f64], slopes: &[f64]) -> Result<CriticalEstimate> {
    if xis.len() != slopes.len() || xis.len() < 2 {
        return Err(Error::Invalid(
            "critical_parameter needs matching ξ and slope lists (≥ 2 points)".into(),
        ));
    }
    let deg = 3.min(xis.len() - 1);
    let rows: Vec<Vec<f64>> = xis
        .iter()
        .map(|&x| (0..=deg).map(|k| x.powi(k as i32)).collect())
        .collect();
    let fit = linear_fit(&rows, slopes)?;
    let m = |x: f64| {
        fit.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * x.powi(k as i32))
            .sum::<f64>()
    };
    let lo = xis.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xis.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 0.5;
    // dense sampling then bisection on the first sign change
    let steps = 4000;
    let mut prev = (lo, m(lo));
    for i in 1..=steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        let v = m(x);
        if prev.1 == 0.0 {
            return Ok(CriticalEstimate::Root(prev.0));
        }
        if prev.1 * v < 0.0 {
            let (mut a, mut b) = (prev.0, x);
            let (mut fa, _) = (prev.1, v);
            for _ in 0..200 {
                let c = 0.5 * (a + b);
                let fc = m(c);
                if fa * fc <= 0.0 {
                    b = c;
                } else {
                    a = c;
                    fa = fc;
                }
            }
            return Ok(CriticalEstimate::Root(0.5 * (a + b)));
        }
        prev = (x, v);
    }
    Ok(CriticalEstimate::OneSidedBound {
        beyond: hi - 0.5,
    })
}

/// Smallest order n at which the fitted trend predicts
/// log10 d*(n) ≤ −(p + t): solves b0 n³ + (p + t + b1) n² + b2 n + b3 ≤ 0.
pub fn predict_order(b: &[f64; 4], p: f64, t: f64) -> Result<usize> {
    if b[0] >= 0.0 {
        return Err(Error::NoPositiveRoot);
    }
    let f = |n: f64| b[0] * n * n * n + (p + t + b[1]) * n * n + b[2] * n + b[3];
    // the cubic has a negative leading coefficient, so it is ≤ 0 for all n
    // past its largest root; start past the rightmost critical point so the
    // small-n dip (where the trend is not yet meaningful) is skipped
    let a2 = p + t + b[1];
    let disc = a2 * a2 - 3.0 * b[0] * b[2];
    let start = if disc > 0.0 {
        let nc = (-a2 - disc.sqrt()) / (3.0 * b[0]);
        nc.ceil().max(1.0) as u64
    } else {
        1
    };
    let mut lo = start.saturating_sub(1);
    let mut hi = start;
    while f(hi as f64) > 0.0 {
        lo = hi;
        hi *= 2;
        if hi > 1 << 40 {
            return Err(Error::NoPositiveRoot);
        }
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if f(mid as f64) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.max(1) as usize)
}
