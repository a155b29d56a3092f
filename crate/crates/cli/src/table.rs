//! Function tables on an alpha grid, written as CSV or embedded in JSON.

use std::path::Path;

use cumrate::envelope::{concave_envelope, ConcaveEnvelope};
use cumrate::cumfn::effective_crdf;
use cumrate::{CumulativeFunction, Mode, RdCurve, Side};
use serde_json::Value;

use crate::error::CliError;

pub const FUNCTION_COLUMNS: [&str; 7] = ["alpha", "G", "L", "G_eff", "envelope", "slope", "D_of_slope"];

/// Rows of numbers; `None` is an empty cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.map(format_number).unwrap_or_default()))?;
        }
        w.flush().map_err(|source| CliError::Write { path: path.to_path_buf(), source })?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|v| v.map_or(Value::Null, number)).collect()))
            .collect();
        serde_json::json!({ "columns": self.columns, "rows": Value::Array(rows) })
    }
}

/// Shortest decimal that parses back to the same `f64`; `inf` for infinity.
pub fn format_number(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

/// JSON number, or the string `"inf"`.
pub fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(format_number(v)), Value::Number)
}

/// Uniform grid of `points` alphas merged with every knot of `fs`.
pub fn alpha_grid(points: usize, fs: &[&CumulativeFunction], extra: &[f64]) -> Vec<f64> {
    let n = points.max(2);
    let mut alphas: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    alphas.extend(fs.iter().flat_map(|f| f.knots().iter().map(|k| k.alpha)));
    alphas.extend_from_slice(extra);
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    alphas
}

fn envelope_slope(env: &ConcaveEnvelope, alpha: f64) -> f64 {
    if alpha >= 1.0 {
        env.slope(alpha, Side::Left)
    } else {
        env.slope(alpha, Side::Right)
    }
}

/// Right-continuous values of `G`, `L`, `G_eff`, its envelope, the envelope
/// slope and `D` of that slope.
pub fn function_table(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    mode: Mode,
    curve: Option<&RdCurve>,
    points: usize,
) -> Result<Table, CliError> {
    let g_eff = effective_crdf(g, l, mode)?;
    let env = concave_envelope(&g_eff)?;
    let env_alphas: Vec<f64> = env.knots().iter().map(|k| k.0).collect();
    let mut table = Table::new(&FUNCTION_COLUMNS);
    for a in alpha_grid(points, &[g, l, &g_eff], &env_alphas) {
        let slope = envelope_slope(&env, a);
        table.rows.push(vec![
            Some(a),
            Some(g.value(a)),
            Some(l.value(a)),
            Some(g_eff.value(a)),
            Some(env.value(a)),
            Some(slope),
            curve.map(|c| c.distortion(slope)),
        ]);
    }
    Ok(table)
}
