//! TOML run configuration: [problem] / [search] / [output] sections.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde::Deserialize;

use ghostode_core::linsolve::BoundaryCondition;
use ghostode_core::metrics::DistanceKind;
use ghostode_core::optimize::{AxisGrid, AxisSpec, ParamSpec};
use ghostode_core::problems::entry;
use ghostode_core::recurrence::ODEProblem;
use ghostode_core::parse;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Built-in problem name; exclusive with inline g/h.
    pub catalog: Option<String>,
    pub g: Option<String>,
    pub h: Option<String>,
    /// "bvp" or "ivp" (inline problems only).
    pub bc: Option<String>,
    pub interval: Option<[f64; 2]>,
    /// y at the left end.
    pub left: Option<f64>,
    /// y at the right end (bvp) or y' at the left end (ivp).
    pub right: Option<f64>,
    #[serde(default)]
    pub params: HashMap<String, f64>,
}

/// An axis is either pinned to a value or scanned over a grid.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum AxisConfig {
    Fixed(f64),
    Grid {
        lo: f64,
        hi: f64,
        points: usize,
        #[serde(default)]
        log: bool,
    },
}

impl AxisConfig {
    fn to_spec(self) -> AxisSpec {
        match self {
            AxisConfig::Fixed(v) => AxisSpec::Fixed(v),
            AxisConfig::Grid {
                lo,
                hi,
                points,
                log,
            } => AxisSpec::Search(AxisGrid {
                lo,
                hi,
                points,
                log,
            }),
        }
    }
}

/// Order selection: a single integer or a "lo..hi" range string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OrderSpec {
    Single(i64),
    Range(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub distance: Option<String>,
    pub orders: Option<OrderSpec>,
    pub p0: Option<AxisConfig>,
    pub p1: Option<AxisConfig>,
    pub p2: Option<AxisConfig>,
    pub p3: Option<AxisConfig>,
    pub eps: Option<AxisConfig>,
    /// Number of linearized correction passes (refine).
    pub steps: Option<usize>,
    /// Family parameter name and values (critical).
    pub family: Option<String>,
    pub family_values: Option<Vec<f64>>,
    /// Marching controls (march).
    pub d_max: Option<f64>,
    pub t0: Option<f64>,
    pub horizon: Option<f64>,
    pub shrink: Option<f64>,
    pub grow: Option<f64>,
    pub max_pieces: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Sample count for CSV exports (uniform in x).
    pub samples: Option<usize>,
}

/// Everything the commands need, resolved and validated.
pub struct Resolved {
    pub config: RunConfig,
    pub problem: Arc<ODEProblem>,
    pub spec: ParamSpec,
    pub kind: DistanceKind,
    pub orders: (usize, usize),
    pub out_dir: PathBuf,
    pub samples: usize,
    /// Raw config text, hashed into the manifest.
    pub text: String,
}

fn parse_orders(s: &OrderSpec) -> Result<(usize, usize), CliError> {
    let bad = |what: &str| CliError::Config(format!("invalid order spec: {what}"));
    match s {
        OrderSpec::Single(n) if *n >= 0 => Ok((*n as usize, *n as usize)),
        OrderSpec::Single(n) => Err(bad(&n.to_string())),
        OrderSpec::Range(r) => {
            let (lo, hi) = r.split_once("..").ok_or_else(|| bad(r))?;
            let lo: usize = lo.trim().parse().map_err(|_| bad(r))?;
            let hi: usize = hi.trim().parse().map_err(|_| bad(r))?;
            if lo > hi {
                return Err(bad(r));
            }
            Ok((lo, hi))
        }
    }
}

fn parse_distance(s: &str) -> Result<DistanceKind, CliError> {
    match s {
        "d1" => Ok(DistanceKind::D1),
        "d2" => Ok(DistanceKind::D2),
        other => Err(CliError::Config(format!(
            "distance must be d1 or d2, got {other:?}"
        ))),
    }
}

/// Instantiates the configured problem, with `extra` overriding named
/// parameters (used by the critical command's family sweep).
pub fn build_problem(
    pc: &ProblemConfig,
    extra: &[(String, f64)],
) -> Result<Arc<ODEProblem>, CliError> {
    let mut params = pc.params.clone();
    for (k, v) in extra {
        params.insert(k.clone(), *v);
    }
    match (&pc.catalog, &pc.g, &pc.h) {
        (Some(name), None, None) => {
            let e = entry(name).ok_or_else(|| {
                CliError::Config(format!("unknown catalog problem {name:?}"))
            })?;
            e.build(&params).map_err(CliError::Numeric)
        }
        (None, Some(g), Some(h)) => {
            let [a, b] = pc.interval.ok_or_else(|| {
                CliError::Config("inline problem needs interval = [a, b]".into())
            })?;
            let (left, right) = match (pc.left, pc.right) {
                (Some(l), Some(r)) => (l, r),
                _ => {
                    return Err(CliError::Config(
                        "inline problem needs left and right boundary data".into(),
                    ))
                }
            };
            if !(a < b) {
                return Err(CliError::Config(format!("bad interval [{a}, {b}]")));
            }
            let bc = match pc.bc.as_deref() {
                Some("bvp") => BoundaryCondition::bvp(a, b, left, right),
                Some("ivp") => BoundaryCondition::ivp(a, b, left, right),
                other => {
                    return Err(CliError::Config(format!(
                        "inline problem needs bc = \"bvp\" or \"ivp\", got {other:?}"
                    )))
                }
            };
            let g = parse(g).map_err(CliError::Numeric)?;
            let h = parse(h).map_err(CliError::Numeric)?;
            Ok(Arc::new(
                ODEProblem::new(g, h, bc).with_params(params),
            ))
        }
        (None, _, _) => Err(CliError::Config(
            "problem needs either catalog or both g and h".into(),
        )),
        (Some(_), _, _) => Err(CliError::Config(
            "catalog and inline g/h are mutually exclusive".into(),
        )),
    }
}

/// Loads, validates, and resolves a config file plus CLI overrides.
pub fn resolve(
    path: &std::path::Path,
    order_flag: Option<&str>,
    distance_flag: Option<&str>,
    out_flag: Option<&std::path::Path>,
) -> Result<Resolved, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    let problem = build_problem(&config.problem, &[])?;
    let (a, b) = problem.interval();

    let s = &config.search;
    let default_p0 = AxisSpec::Search(AxisGrid {
        lo: 1e-3 * (b - a),
        hi: 10.0 * (b - a),
        points: 400,
        log: true,
    });
    let axis = |c: &Option<AxisConfig>, default: AxisSpec| {
        c.map(AxisConfig::to_spec).unwrap_or(default)
    };
    let spec = ParamSpec {
        p0: axis(&s.p0, default_p0),
        p1: axis(&s.p1, AxisSpec::Fixed(0.0)),
        p2: axis(&s.p2, AxisSpec::Fixed(0.0)),
        p3: axis(&s.p3, AxisSpec::Fixed(0.0)),
        epsilon: axis(&s.eps, AxisSpec::Fixed(1.0)),
    };

    let kind = match distance_flag.map(str::to_owned).or_else(|| s.distance.clone()) {
        Some(d) => parse_distance(&d)?,
        None => DistanceKind::D1,
    };
    let orders = match order_flag {
        Some(f) => parse_orders(&OrderSpec::Range(
            if f.contains("..") { f.to_string() } else { format!("{f}..{f}") },
        ))?,
        None => match &s.orders {
            Some(o) => parse_orders(o)?,
            None => (5, 15),
        },
    };

    let out_dir = out_flag
        .map(|p| p.to_path_buf())
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let samples = config.output.samples.unwrap_or(201);
    if samples < 2 {
        return Err(CliError::Config("output.samples must be ≥ 2".into()));
    }

    Ok(Resolved {
        config,
        problem,
        spec,
        kind,
        orders,
        out_dir,
        samples,
        text,
    })
}

/// Names of the scanned axes, in spec order (for CSV headers).
pub fn searched_names(spec: &ParamSpec) -> Vec<&'static str> {
    [
        ("p0", spec.p0),
        ("p1", spec.p1),
        ("p2", spec.p2),
        ("p3", spec.p3),
        ("eps", spec.epsilon),
    ]
    .into_iter()
    .filter_map(|(name, s)| match s {
        AxisSpec::Search(_) => Some(name),
        AxisSpec::Fixed(_) => None,
    })
    .collect()
}

/// The fixed parameter point; errors if any axis is still a grid.
pub fn fixed_params(
    spec: &ParamSpec,
) -> Result<ghostode_core::linsolve::LinearParams, CliError> {
    let v = |s: AxisSpec, name: &str| match s {
        AxisSpec::Fixed(v) => Ok(v),
        AxisSpec::Search(_) => Err(CliError::Config(format!(
            "{name} must be a fixed value for this command"
        ))),
    };
    Ok(ghostode_core::linsolve::LinearParams::new(
        v(spec.p0, "p0")?,
        v(spec.p1, "p1")?,
        v(spec.p2, "p2")?,
        v(spec.p3, "p3")?,
        v(spec.epsilon, "eps")?,
    ))
}
