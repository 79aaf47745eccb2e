//! Deterministic artifact writing: every float is printed with 17
//! significant digits, files land via temp-file + rename, and only the run
//! manifest carries timing.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use ghostode_core::funcspace::ChebFun;
use ghostode_core::linsolve::LinearParams;

use crate::CliError;

/// 17 significant digits; round-trips f64 losslessly.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // JSON has no literals for these; quote them
        format!("\"{v}\"")
    }
}

pub fn write_atomic(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, content)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, &path)
        .map_err(|e| CliError::Runtime(format!("rename to {}: {e}", path.display())))?;
    Ok(())
}

pub fn json_array(vals: impl IntoIterator<Item = String>) -> String {
    let items: Vec<String> = vals.into_iter().collect();
    format!("[{}]", items.join(","))
}

pub fn json_floats(vals: &[f64]) -> String {
    json_array(vals.iter().map(|&v| fmt17(v)))
}

pub fn json_params(p: &LinearParams) -> String {
    format!(
        "{{\"p0\":{},\"p1\":{},\"p2\":{},\"p3\":{},\"eps\":{}}}",
        fmt17(p.p0),
        fmt17(p.p1),
        fmt17(p.p2),
        fmt17(p.p3),
        fmt17(p.epsilon)
    )
}

pub fn json_chebfun(f: &ChebFun) -> String {
    let (a, b) = f.interval();
    format!(
        "{{\"interval\":[{},{}],\"coeffs\":{}}}",
        fmt17(a),
        fmt17(b),
        json_floats(f.coeffs())
    )
}

/// `x,y,dy,residual` rows at the given abscissae.
pub fn samples_csv(rows: &[(f64, f64, f64, f64)]) -> String {
    let mut out = String::from("x,y,dy,residual\n");
    for &(x, y, dy, r) in rows {
        let _ = writeln!(out, "{},{},{},{}", fmt17(x), fmt17(y), fmt17(dy), fmt17(r));
    }
    out
}

/// Run manifest; the only artifact allowed to vary between identical runs.
pub fn manifest_json(command: &str, config_text: &str, wall_ms: u128) -> String {
    let hash = Sha256::digest(config_text.as_bytes());
    let mut hex = String::with_capacity(64);
    for b in hash {
        let _ = write!(hex, "{b:02x}");
    }
    format!(
        "{{\"command\":\"{command}\",\"config_sha256\":\"{hex}\",\"version\":\"{}\",\"wall_time_ms\":{wall_ms}}}\n",
        env!("CARGO_PKG_VERSION")
    )
}
