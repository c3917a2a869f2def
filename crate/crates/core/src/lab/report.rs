//! JSON and CSV serialization of lab results.
//!
//! JSON objects come out with sorted keys and complex numbers as `[re, im]`.
//! CSV uses `.` decimals, LF endings and empty fields where a column is
//! undefined for a row.

use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::dynamics::{Classification, OrbitRecord, StepEstimate};
use crate::geometry::{Model, Point};
use crate::straightening::StraighteningLimit;

pub const SCHEMA: u64 = 1;
pub const TOOL: &str = "parabolic-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Adding `0.0` turns `-0.0` into `0.0`, so signed zeros never reach the output.
fn unsigned_zero(x: f64) -> f64 {
    x + 0.0
}

pub fn complex(z: Complex64) -> Value {
    json!([real(z.re), real(z.im)])
}

pub fn complexes(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().map(|z| complex(*z)).collect())
}

pub fn point(p: &Point) -> Value {
    let model = match p.model() {
        Model::Disk => "disk",
        Model::HalfPlane => "halfplane",
    };
    json!({ "model": model, "coord": complex(p.coord()) })
}

/// Non-finite floats have no JSON representation; they become `null`.
pub fn real(x: f64) -> Value {
    if x.is_finite() {
        json!(unsigned_zero(x))
    } else {
        Value::Null
    }
}

pub fn step(s: &StepEstimate) -> Value {
    json!({
        "probe": point(&s.probe),
        "d_tail": real(s.d_tail),
        "tail_ratio": real(s.tail_ratio),
        "s_hat": real(s.s_hat),
        "verdict": s.verdict,
        "n_used": s.n_used,
    })
}

pub fn classification(c: &Classification) -> Value {
    match c {
        Classification::Elliptic { fixed, multiplier } => json!({
            "class": "elliptic",
            "fixed": complex(*fixed),
            "multiplier": complex(*multiplier),
        }),
        Classification::Hyperbolic { tau, lambda } => json!({
            "class": "hyperbolic",
            "tau": complex(*tau),
            "lambda": real(*lambda),
        }),
        Classification::Parabolic { tau, step_class, steps } => json!({
            "class": "parabolic",
            "tau": complex(*tau),
            "step_class": step_class,
            "steps": steps.iter().map(step).collect::<Vec<_>>(),
        }),
    }
}

pub fn straightening(lim: &StraighteningLimit) -> Value {
    json!({
        "base": complex(lim.base),
        "reference": complex(lim.reference),
        "n": lim.n,
        "converged": lim.converged,
        "last_change": real(lim.last_change),
        "spread": real(lim.spread),
        "constant": lim.constant,
        "collapsed": lim.collapsed,
        "monotone_margin": real(lim.monotone_margin),
        "grid": complexes(&lim.grid),
        "values": complexes(&lim.values),
    })
}

pub fn unix_time() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Adds the schema, tool and timestamp fields to a report body.
pub fn envelope(command: &str, mut body: Value) -> Value {
    if let Value::Object(map) = &mut body {
        map.insert("schema".into(), json!(SCHEMA));
        map.insert("tool".into(), json!(TOOL));
        map.insert("version".into(), json!(VERSION));
        map.insert("command".into(), json!(command));
        map.insert("timestamp".into(), json!(unix_time()));
    }
    body
}

/// Copy of a report with every `timestamp` field removed, for comparisons.
pub fn without_timestamp(v: &Value) -> Value {
    match v {
        Value::Object(map) => Value::Object(
            map.iter()
                .filter(|(k, _)| k.as_str() != "timestamp")
                .map(|(k, v)| (k.clone(), without_timestamp(v)))
                .collect(),
        ),
        Value::Array(items) => Value::Array(items.iter().map(without_timestamp).collect()),
        other => other.clone(),
    }
}

pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

pub fn write(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)
}

fn field(out: &mut String, x: Option<f64>) {
    out.push(',');
    if let Some(x) = x {
        let _ = write!(out, "{}", unsigned_zero(x));
    }
}

pub const ORBIT_HEADER: &str = "n,re,im,d_n,ratio_re,ratio_im,arg,im_over_abs";

/// Orbit dump in working coordinates, at most `rows` rows. Ratio, argument
/// and cone columns are filled for half-plane orbits only.
pub fn orbit_csv(rec: &OrbitRecord, rows: usize) -> String {
    let mut out = String::with_capacity(rec.points.len() * 96);
    out.push_str(ORBIT_HEADER);
    out.push('\n');
    let half = rec.model == Model::HalfPlane;
    for (n, w) in rec.points.iter().enumerate().take(rows) {
        let _ = write!(out, "{n},{},{}", unsigned_zero(w.re), unsigned_zero(w.im));
        field(&mut out, rec.d.get(n).copied());
        let ratio = if half { rec.ratios.get(n) } else { None };
        field(&mut out, ratio.map(|r| r.re));
        field(&mut out, ratio.map(|r| r.im));
        field(&mut out, half.then(|| rec.args[n]));
        field(&mut out, half.then(|| w.im / w.norm()));
        out.push('\n');
    }
    out
}

pub const STRAIGHTEN_HEADER: &str = "n,grid_index,re,im,abs";

pub fn straighten_csv(lim: &StraighteningLimit) -> String {
    let mut out = String::new();
    out.push_str(STRAIGHTEN_HEADER);
    out.push('\n');
    for (n, values) in &lim.checkpoints {
        for (k, h) in values.iter().enumerate() {
            let _ = writeln!(out, "{n},{k},{},{},{}", unsigned_zero(h.re), unsigned_zero(h.im), h.norm());
        }
    }
    out
}
