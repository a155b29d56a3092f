//! Browser bindings: three JSON-in, JSON-out operations for `www/index.html`.
//!
//! Every export has a plain Rust twin returning `Result<String, String>` so
//! the logic is testable without a JavaScript host.

use cumrate::achieve::{check_lossy, min_distortion};
use cumrate::cumfn::{effective_crdf, rate_leakage_gap, KnotList};
use cumrate::envelope::concave_envelope;
use cumrate::schedule::transmission_plan;
use cumrate::{CumulativeFunction, Mode, RdCurve};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const SAMPLES: usize = 201;

fn parse_function(text: &str, leakage: bool) -> Result<CumulativeFunction, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if leakage && value == Value::String("unconstrained".into()) {
        return Ok(CumulativeFunction::unconstrained());
    }
    let list: KnotList = serde_json::from_value(value).map_err(|e| e.to_string())?;
    let f = if leakage {
        CumulativeFunction::leakage(list.knots)
    } else {
        CumulativeFunction::new(list.knots)
    };
    f.map_err(|e| e.to_string())
}

/// `{"kind": "erasure"}`, `{"kind": "linear", "c": 2}` or
/// `{"kind": "hamming", "p": 0.5}`.
fn parse_curve(text: &str) -> Result<RdCurve, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let param = |name: &str| {
        value[name].as_f64().ok_or_else(|| format!("curve needs a numeric `{name}`"))
    };
    let curve = match value["kind"].as_str() {
        Some("erasure") => RdCurve::linear(1.0),
        Some("linear") => RdCurve::linear(param("c")?),
        Some("hamming") => RdCurve::hamming_binary(param("p")?),
        _ => return Err("curve kind must be erasure, linear or hamming".into()),
    };
    curve.map_err(|e| e.to_string())
}

fn finite_or_null(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// Effective rate function, its envelope, and samples of all four curves.
pub fn curves_json(crdf: &str, cldf: &str) -> Result<String, String> {
    let g = parse_function(crdf, false)?;
    let l = parse_function(cldf, true)?;
    let g_eff = effective_crdf(&g, &l, Mode::Lossy).map_err(|e| e.to_string())?;
    let env = concave_envelope(&g_eff).map_err(|e| e.to_string())?;
    let withheld = rate_leakage_gap(&g, &l).map_err(|e| e.to_string())?.value.max(0.0);
    let samples: Vec<Value> = (0..SAMPLES)
        .map(|i| {
            let a = i as f64 / (SAMPLES - 1) as f64;
            json!([a, g.value(a), finite_or_null(l.value(a)), g_eff.value(a), env.value(a)])
        })
        .collect();
    Ok(json!({
        "withheld_rate": withheld,
        "g_eff": KnotList::from(g_eff),
        "envelope": env.knots(),
        "samples": samples,
    })
    .to_string())
}

/// Lossy verdict at `dbar` together with the minimum distortion.
pub fn lossy_json(crdf: &str, cldf: &str, curve: &str, dbar: f64) -> Result<String, String> {
    let g = parse_function(crdf, false)?;
    let l = parse_function(cldf, true)?;
    let curve = parse_curve(curve)?;
    let verdict = check_lossy(&g, &l, &curve, dbar).map_err(|e| e.to_string())?;
    let best = min_distortion(&g, &l, &curve).map_err(|e| e.to_string())?;
    Ok(json!({ "verdict": verdict, "min_distortion": best }).to_string())
}

/// Block-by-block transmission plan.
pub fn plan_json(crdf: &str, cldf: &str, curve: &str, k: usize) -> Result<String, String> {
    let g = parse_function(crdf, false)?;
    let l = parse_function(cldf, true)?;
    let curve = parse_curve(curve)?;
    let plan = transmission_plan(&g, &l, &curve, k).map_err(|e| e.to_string())?;
    serde_json::to_string(&plan).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn curves(crdf: &str, cldf: &str) -> Result<String, JsValue> {
    curves_json(crdf, cldf).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn lossy(crdf: &str, cldf: &str, curve: &str, dbar: f64) -> Result<String, JsValue> {
    lossy_json(crdf, cldf, curve, dbar).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn plan(crdf: &str, cldf: &str, curve: &str, k: usize) -> Result<String, JsValue> {
    plan_json(crdf, cldf, curve, k).map_err(|e| JsValue::from_str(&e))
}
