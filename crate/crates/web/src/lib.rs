//! wasm-bindgen bindings for the browser demo: analyze a model, render
//! its Σ grid, and run the LC/ES conversion driver, all on pasted model
//! text. Build with `wasm-pack build --target web` and open `www/`.

use daefix_core::convert::{fix_dae, FixOptions, Method};
use daefix_core::model::{parse_model, write_model};
use daefix_core::report::{analyze, build_report, render_report, render_sigma};
use wasm_bindgen::prelude::*;

fn err_js(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Structural analysis of a model text. Returns a JSON string holding the
/// report plus the rendered Σ grid.
#[wasm_bindgen]
pub fn analyze_model(text: &str, btf: &str) -> Result<String, JsValue> {
    let sys = parse_model(text).map_err(err_js)?;
    let analyzed = analyze(&sys).map_err(err_js)?;
    let report = build_report(&sys, &analyzed);
    let blocks = match btf {
        "coarse" => &analyzed.coarse,
        _ => &analyzed.fine,
    };
    let payload = serde_json::json!({
        "report": report,
        "sigma_grid": render_sigma(&sys, &analyzed.analysis, blocks),
        "text_report": render_report(&sys, &analyzed, btf),
    });
    Ok(payload.to_string())
}

/// Run the analyze-convert loop and return the fixed model plus reports.
#[wasm_bindgen]
pub fn fix_model(text: &str, method: &str, max_iter: u32) -> Result<String, JsValue> {
    let sys = parse_model(text).map_err(err_js)?;
    let options = FixOptions {
        method: match method {
            "lc" => Method::Lc,
            "es" => Method::Es,
            _ => Method::Auto,
        },
        max_iterations: max_iter as usize,
    };
    let fixed = fix_dae(&sys, &options).map_err(err_js)?;
    let analyzed = analyze(&fixed.system).map_err(err_js)?;
    let report = build_report(&fixed.system, &analyzed);
    let payload = serde_json::json!({
        "model": write_model(&fixed.system),
        "conversions": fixed.conversions.len(),
        "initial_val_sigma": fixed.initial_val,
        "final_val_sigma": fixed.final_val,
        "report": report,
        "sigma_grid": render_sigma(&fixed.system, &analyzed.analysis, &analyzed.fine),
        "text_report": render_report(&fixed.system, &analyzed, "fine"),
    });
    Ok(payload.to_string())
}

/// Bundled example models for the demo page, as a JSON object
/// name -> model text.
#[wasm_bindgen]
pub fn example_models() -> String {
    serde_json::json!({
        "intro": include_str!("../../../models/intro.dae"),
        "robotarm": include_str!("../../../models/robotarm.dae"),
        "transamp": include_str!("../../../models/transamp.dae"),
        "ringmod": include_str!("../../../models/ringmod.dae"),
        "mod2pend": include_str!("../../../models/mod2pend.dae"),
    })
    .to_string()
}
