//! One function per subcommand; each writes its artifacts and returns.

use std::fmt::Write as _;

use ghostode_core::analysis::{ghost_expansion, linear_correction};
use ghostode_core::funcspace::ChebFun;
use ghostode_core::march::{march, MarchConfig};
use ghostode_core::metrics::{distance, residual_samples};
use ghostode_core::optimize::{
    critical_parameter, fit_asymptotics, scan_minima, track_sequences, CriticalEstimate,
    MinimaRecord, SequenceRecord,
};
use ghostode_core::recurrence::expand;

use crate::artifacts::{
    fmt17, json_array, json_chebfun, json_floats, json_params, samples_csv, write_atomic,
};
use crate::config::{build_problem, fixed_params, searched_names, Resolved};
use crate::CliError;

/// Uniform abscissae over [a, b].
fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn sample_rows(
    r: &Resolved,
    y: &ChebFun,
    xs: &[f64],
) -> Result<Vec<(f64, f64, f64, f64)>, CliError> {
    let dy = y.differentiate();
    let res = residual_samples(&r.problem, y, xs).map_err(CliError::Numeric)?;
    Ok(xs
        .iter()
        .zip(&res)
        .map(|(&x, &rv)| (x, y.eval_clamped(x), dy.eval_clamped(x), rv))
        .collect())
}

/// One scan per order; orders whose scan fails numerically contribute an
/// empty minima list (the landscape may simply hold no finite minimum).
fn scans(r: &Resolved) -> Vec<Vec<MinimaRecord>> {
    (r.orders.0..=r.orders.1)
        .map(|n| scan_minima(&r.problem, n, &r.spec, r.kind).unwrap_or_default())
        .collect()
}

/// Fit window: the upper two-thirds of the order range, widened downward if
/// needed so at least five orders remain for the fit.
fn fit_window(orders: (usize, usize)) -> (usize, usize) {
    let (lo, hi) = orders;
    let start = (lo + (hi - lo + 1) / 3).min(hi.saturating_sub(4)).max(lo);
    (start, hi)
}

pub fn expand_cmd(r: &Resolved) -> Result<(), CliError> {
    let p = fixed_params(&r.spec)?;
    let n = single_order(r)?;
    let e = expand(&r.problem, p, n).map_err(CliError::Numeric)?;
    let y = e.partial_sum(n, p.epsilon);
    let (a, b) = r.problem.interval();
    let rows = sample_rows(r, &y, &uniform(a, b, r.samples))?;
    write_atomic(&r.out_dir, "samples.csv", &samples_csv(&rows))?;
    let d = distance(&r.problem, &y, r.kind)
        .map(|v| fmt17(v))
        .unwrap_or_else(|_| "null".into());
    let json = format!(
        "{{\"order\":{n},\"params\":{},\"distance_kind\":\"{}\",\"d\":{d},\"y\":{}}}\n",
        json_params(&p),
        r.kind,
        json_chebfun(&y)
    );
    write_atomic(&r.out_dir, "expand.json", &json)
}

fn single_order(r: &Resolved) -> Result<usize, CliError> {
    if r.orders.0 != r.orders.1 {
        return Err(CliError::Config(
            "this command needs a single order, not a range".into(),
        ));
    }
    Ok(r.orders.0)
}

pub fn minimize_cmd(r: &Resolved) -> Result<(), CliError> {
    let names = searched_names(&r.spec);
    let mut csv = format!("n,{},distance_kind,d_star,basin_width\n", names.join(","));
    for recs in scans(r) {
        for m in recs {
            let vals: Vec<String> = m.searched.iter().map(|(_, v)| fmt17(*v)).collect();
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                m.n,
                vals.join(","),
                m.kind,
                fmt17(m.d_star),
                fmt17(m.basin_width)
            );
        }
    }
    write_atomic(&r.out_dir, "minima.csv", &csv)
}

fn sequence_json(r: &Resolved, seq: &SequenceRecord) -> String {
    let (k, l) = seq.id();
    let members = json_array(seq.members.iter().map(|m| {
        format!(
            "{{\"n\":{},\"p\":{},\"d_star\":{}}}",
            m.n,
            json_params(&m.params),
            fmt17(m.d_star)
        )
    }));
    let fit = match fit_asymptotics(seq, fit_window(r.orders)) {
        Ok(f) => {
            let a = f
                .param_fits
                .first()
                .map(|(_, pf)| json_floats(&pf.coeffs))
                .unwrap_or_else(|| "[]".into());
            format!(
                "{{\"a\":{a},\"b\":{},\"delta\":{}}}",
                json_floats(&f.distance_fit.coeffs),
                fmt17(f.delta)
            )
        }
        Err(_) => "null".into(),
    };
    format!("{{\"id\":[{k},{l}],\"members\":{members},\"fit\":{fit}}}")
}

pub fn sequence_cmd(r: &Resolved) -> Result<(), CliError> {
    let seqs = track_sequences(&scans(r));
    let json = format!(
        "{}\n",
        json_array(seqs.iter().map(|s| sequence_json(r, s)))
    );
    write_atomic(&r.out_dir, "sequences.json", &json)
}

pub fn ghost_cmd(r: &Resolved) -> Result<(), CliError> {
    let mut pairs = Vec::new();
    let mut orders = Vec::new();
    for (i, recs) in scans(r).iter().enumerate() {
        let n = r.orders.0 + i;
        let Some(best) = recs.iter().min_by(|a, b| a.d_star.total_cmp(&b.d_star)) else {
            continue;
        };
        let e = expand(&r.problem, best.params, n).map_err(CliError::Numeric)?;
        pairs.push((e.partial_sum(n, best.params.epsilon), best.d_star));
        orders.push(n);
    }
    let ge = ghost_expansion(&pairs).map_err(CliError::Numeric)?;
    let terms = json_array(ge.terms.iter().map(|t| {
        format!(
            "{{\"m\":{},\"d_star\":{},\"w\":{}}}",
            t.m,
            fmt17(t.d_star),
            json_chebfun(&t.w)
        )
    }));
    let json = format!(
        "{{\"orders\":{},\"suspect\":{},\"terms\":{terms}}}\n",
        json_array(orders.iter().map(|n| n.to_string())),
        ge.suspect
    );
    write_atomic(&r.out_dir, "ghost.json", &json)
}

pub fn refine_cmd(r: &Resolved) -> Result<(), CliError> {
    let p = fixed_params(&r.spec)?;
    let n = single_order(r)?;
    let e = expand(&r.problem, p, n).map_err(CliError::Numeric)?;
    let mut y = e.partial_sum(n, p.epsilon);
    let steps = r.config.search.steps.unwrap_or(1);
    let mut trail = vec![distance(&r.problem, &y, r.kind).map_err(CliError::Numeric)?];
    for _ in 0..steps {
        let z = linear_correction(&r.problem, &y).map_err(CliError::Numeric)?;
        y = y.add(&z).map_err(CliError::Numeric)?;
        trail.push(distance(&r.problem, &y, r.kind).map_err(CliError::Numeric)?);
    }
    let (a, b) = r.problem.interval();
    let rows = sample_rows(r, &y, &uniform(a, b, r.samples))?;
    write_atomic(&r.out_dir, "samples.csv", &samples_csv(&rows))?;
    let json = format!(
        "{{\"order\":{n},\"params\":{},\"steps\":{steps},\"distance_kind\":\"{}\",\"d_trail\":{},\"y\":{}}}\n",
        json_params(&p),
        r.kind,
        json_floats(&trail),
        json_chebfun(&y)
    );
    write_atomic(&r.out_dir, "refine.json", &json)
}

pub fn march_cmd(r: &Resolved) -> Result<(), CliError> {
    let s = &r.config.search;
    let horizon = s.horizon.ok_or_else(|| {
        CliError::Config("march needs search.horizon".into())
    })?;
    let mut cfg = MarchConfig::new(
        single_order(r)?,
        s.d_max.unwrap_or(1e-6),
        s.t0.unwrap_or(1.0),
        horizon,
    );
    if let Some(v) = s.shrink {
        cfg.shrink = v;
    }
    if let Some(v) = s.grow {
        cfg.grow = v;
    }
    if let Some(v) = s.max_pieces {
        cfg.max_pieces = v;
    }
    let sol = march(&r.problem, &cfg).map_err(CliError::Numeric)?;

    let pieces = json_array(sol.pieces.iter().map(|p| {
        let (_, coeffs) = (p.fun.interval(), p.fun.coeffs());
        format!(
            "{{\"interval\":[{},{}],\"params\":{},\"d1\":{},\"coeffs\":{}}}",
            fmt17(p.interval[0]),
            fmt17(p.interval[1]),
            json_params(&p.params),
            fmt17(p.d1),
            json_floats(coeffs)
        )
    }));
    let json = format!(
        "{{\"knots\":{},\"pieces\":{pieces}}}\n",
        json_floats(&sol.knots)
    );
    write_atomic(&r.out_dir, "piecewise.json", &json)?;

    let (a, _) = r.problem.interval();
    let end = sol.knots.last().copied().unwrap_or(horizon);
    let mut rows = Vec::with_capacity(r.samples);
    for x in uniform(a, end, r.samples) {
        let piece = sol
            .pieces
            .iter()
            .find(|p| x <= p.interval[1])
            .or(sol.pieces.last())
            .unwrap();
        let rv = residual_samples(&r.problem, &piece.fun, &[x]).map_err(CliError::Numeric)?[0];
        rows.push((x, sol.eval(x), sol.eval_dy(x), rv));
    }
    write_atomic(&r.out_dir, "samples.csv", &samples_csv(&rows))
}

pub fn critical_cmd(r: &Resolved) -> Result<(), CliError> {
    let s = &r.config.search;
    let (family, values) = match (&s.family, &s.family_values) {
        (Some(f), Some(v)) if !v.is_empty() => (f.clone(), v.clone()),
        _ => {
            return Err(CliError::Config(
                "critical needs search.family and a non-empty search.family_values".into(),
            ))
        }
    };
    let mut slopes = Vec::new();
    for &v in &values {
        let problem = build_problem(&r.config.problem, &[(family.clone(), v)])?;
        let records: Vec<Vec<MinimaRecord>> = (r.orders.0..=r.orders.1)
            .map(|n| scan_minima(&problem, n, &r.spec, r.kind).unwrap_or_default())
            .collect();
        let seqs = track_sequences(&records);
        let seq = seqs
            .iter()
            .max_by_key(|s| s.members.len())
            .ok_or_else(|| {
                CliError::Runtime(format!("{family} = {v}: no minima sequence found"))
            })?;
        let fit = fit_asymptotics(seq, fit_window(r.orders)).map_err(CliError::Numeric)?;
        // d* ≃ 10^{b0 n} ⇒ decay slope m = −b0
        slopes.push(-fit.distance_fit.coeffs[0]);
    }
    let est = critical_parameter(&values, &slopes).map_err(CliError::Numeric)?;
    let est_json = match est {
        CriticalEstimate::Root(x) => format!("{{\"root\":{}}}", fmt17(x)),
        CriticalEstimate::OneSidedBound { beyond } => {
            format!("{{\"beyond\":{}}}", fmt17(beyond))
        }
    };
    let json = format!(
        "{{\"family\":\"{family}\",\"values\":{},\"slopes\":{},\"estimate\":{est_json}}}\n",
        json_floats(&values),
        json_floats(&slopes)
    );
    write_atomic(&r.out_dir, "critical.json", &json)
}
