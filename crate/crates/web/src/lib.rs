//! Browser bindings for the teleportation simulator.
//!
//! Three operations back `www/index.html`: a full report for one
//! configuration, an E_N or fidelity surface over (q, r), and the ν̃₋ profile
//! along r from the pipeline and from the closed form. The plain-Rust
//! functions are what the tests exercise; the `#[wasm_bindgen]` wrappers only
//! convert errors.

use cvtele::metrics;
use cvtele::sweep::{self, MetricSelection, NuSource, SweepGrid};
use cvtele::{teleport, GainConvention, ProtocolConfig};
use wasm_bindgen::prelude::*;

fn convention(name: &str) -> Result<GainConvention, String> {
    name.parse()
}

/// Full report as JSON.
pub fn report_json(q: f64, eta: f64, r: f64, phi: f64, conv: &str) -> Result<String, String> {
    let config = ProtocolConfig::new(q, eta, r, phi, convention(conv)?).map_err(|e| e.to_string())?;
    let report = teleport(&config).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

/// `steps × steps` values on `[0, q_max] × [0, r_max]`, q outer. Undefined
/// fidelities come back as NaN.
pub fn surface_values(
    metric: &str,
    q_max: f64,
    r_max: f64,
    steps: usize,
    phi: f64,
    conv: &str,
) -> Result<Vec<f64>, String> {
    let selection: MetricSelection = metric.parse()?;
    if selection == MetricSelection::Both {
        return Err("surface needs a single metric: en or fidelity".into());
    }
    if steps > 201 {
        return Err(format!("{steps} steps is more than the page can draw (max 201)"));
    }
    let grid = SweepGrid {
        q_min: 0.0,
        q_max,
        q_steps: steps,
        r_min: 0.0,
        r_max,
        r_steps: steps,
        phi,
        convention: convention(conv)?,
        ..SweepGrid::default()
    };
    let rows = sweep::run(&grid, selection, NuSource::Pipeline).map_err(|e| e.to_string())?;
    Ok(rows
        .iter()
        .map(|row| match selection {
            MetricSelection::En => row.log_negativity,
            _ => row.fidelity,
        })
        .map(|v| v.unwrap_or(f64::NAN))
        .collect())
}

/// `[r, ν̃₋ pipeline, ν̃₋ closed form]` triples for `steps` values of r in
/// `[0, r_max]`, at the default phases.
pub fn nu_profile_values(q: f64, r_max: f64, steps: usize) -> Result<Vec<f64>, String> {
    let grid = SweepGrid {
        q_min: q,
        q_max: q,
        q_steps: 1,
        r_min: 0.0,
        r_max,
        r_steps: steps,
        ..SweepGrid::default()
    };
    let rows = sweep::run(&grid, MetricSelection::En, NuSource::Pipeline).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * rows.len());
    for row in rows {
        out.push(row.r);
        out.push(row.nu_minus);
        out.push(metrics::nu_closed_form(q, row.r).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn report(q: f64, eta: f64, r: f64, phi: f64, convention: &str) -> Result<String, JsValue> {
    report_json(q, eta, r, phi, convention).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn surface(
    metric: &str,
    q_max: f64,
    r_max: f64,
    steps: usize,
    phi: f64,
    convention: &str,
) -> Result<Vec<f64>, JsValue> {
    surface_values(metric, q_max, r_max, steps, phi, convention).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn nu_profile(q: f64, r_max: f64, steps: usize) -> Result<Vec<f64>, JsValue> {
    nu_profile_values(q, r_max, steps).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn report_has_anchor_fidelity() {
        let json = report_json(0.0, FRAC_PI_4, 0.0, FRAC_PI_8, "as-printed").unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let f = v["fidelity"].as_f64().unwrap();
        assert!((f - 1.0 / (18.25f64.sqrt() - 1.5)).abs() < 1e-12);
        assert_eq!(v["sigma_out"]["entries"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(report_json(-1.0, 0.0, 0.0, 0.0, "as-printed").is_err());
        assert!(report_json(0.0, 0.0, 0.0, 0.0, "loud").is_err());
        assert!(surface_values("both", 2.0, 2.0, 5, FRAC_PI_8, "as-printed").is_err());
        assert!(surface_values("en", 2.0, 2.0, 1000, FRAC_PI_8, "as-printed").is_err());
    }

    #[test]
    fn surface_layout() {
        let v = surface_values("fidelity", 2.0, 2.0, 5, FRAC_PI_8, "as-printed").unwrap();
        assert_eq!(v.len(), 25);
        // q = 0, r = 0 comes first.
        assert!((v[0] - 0.36075).abs() < 1e-5);
        let en = surface_values("en", 2.0, 2.0, 5, FRAC_PI_8, "as-printed").unwrap();
        assert!(en[..5].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn profile_agrees_at_r0_and_parts_later() {
        let p = nu_profile_values(1.0, 2.0, 5).unwrap();
        assert_eq!(p.len(), 15);
        assert!((p[1] - p[2]).abs() < 1e-10);
        assert!((p[13] - p[14]).abs() > 1.0);
    }
}
