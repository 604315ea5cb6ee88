//! End-to-end CLI checks: subcommands, flags, exit codes, file outputs.

use std::path::PathBuf;
use std::process::{Command, Output};

fn daefix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daefix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn model_path(name: &str) -> String {
    format!("{}/../../models/{name}.dae", env!("CARGO_MANIFEST_DIR"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("daefix-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn analyze_robot_arm_json() {
    let out = daefix(&["analyze", &model_path("robotarm"), "--json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["val_sigma"], 2);
    assert_eq!(report["structural_index"], 3);
    assert_eq!(report["jacobian"], "identically-singular");
    assert_eq!(report["fine_btf"]["sizes"], serde_json::json!([1, 2, 2]));
    // Exactly one singular block, of size 2.
    let singular: Vec<&serde_json::Value> = report["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|b| b["singular"] == true)
        .collect();
    assert_eq!(singular.len(), 1);
    assert_eq!(singular[0]["size"], 2);
}

#[test]
fn analyze_text_report_contains_the_sigma_grid() {
    let out = daefix(&["analyze", &model_path("intro"), "--btf", "fine"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("valΣ = 2"));
    assert!(text.contains("coarse BTF: 2"));
    assert!(text.contains("0*"));
    assert!(text.contains("identically singular"));
}

#[test]
fn analyze_supports_btf_modes() {
    for mode in ["fine", "coarse", "none"] {
        let out = daefix(&["analyze", &model_path("mod2pend"), "--btf", mode]);
        assert!(out.status.success(), "mode {mode}");
    }
}

#[test]
fn fix_robot_arm_lc_writes_the_converted_model() {
    let dir = tmp_dir("lc");
    let out_path = dir.join("robotarm.fixed.dae");
    let out = daefix(&[
        "fix",
        &model_path("robotarm"),
        "--method",
        "lc",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("valΣ 2 -> 0"));
    let fixed = std::fs::read_to_string(&out_path).unwrap();
    // Provenance comment plus a parseable model.
    assert!(fixed.starts_with("# LC conversion on block 2: replaced C"));
    let sys = daefix_core::model::parse_model(&fixed).unwrap();
    assert_eq!(sys.n(), 5);
    let analysis =
        daefix_core::structure::analyze_sigma(&daefix_core::structure::signature_matrix(&sys))
            .unwrap();
    assert_eq!(analysis.val, 0);
    assert_eq!(daefix_core::structure::structural_index(&analysis), 5);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn fix_transamp_es_grows_to_eleven_equations() {
    let dir = tmp_dir("es");
    let out_path = dir.join("transamp.fixed.dae");
    let out = daefix(&[
        "fix",
        &model_path("transamp"),
        "--method",
        "es",
        "-o",
        out_path.to_str().unwrap(),
        "--json",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n"], 11);
    assert_eq!(report["val_sigma"], 5);
    assert_eq!(report["conversions"].as_array().unwrap().len(), 3);
    let fixed = std::fs::read_to_string(&out_path).unwrap();
    for name in ["y_x2", "y_x5", "y_x8", "g_x2", "g_x5", "g_x8"] {
        assert!(fixed.contains(name), "missing {name} in output");
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn fix_on_a_nonsingular_model_changes_nothing() {
    let dir = tmp_dir("noop");
    let out_path = dir.join("mod2pend.fixed.dae");
    let out = daefix(&[
        "fix",
        &model_path("mod2pend"),
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("applied 0 conversion(s)"));
    let sys = daefix_core::model::parse_model(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(sys.n(), 6);
    assert!(sys.conversions.is_empty());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tmp_dir("codes");
    // 4: parse error.
    let bad = dir.join("bad.dae");
    std::fs::write(&bad, "var x;\neq f: x + = 0;\n").unwrap();
    let out = daefix(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));

    // 2: structurally ill posed.
    let ill = dir.join("ill.dae");
    std::fs::write(&ill, "var x1, x2;\neq f1: x1 = 0;\neq f2: x1' = 0;\n").unwrap();
    let out = daefix(&["analyze", ill.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // 3: no applicable conversion (LC cannot fix this block).
    let stuck = dir.join("stuck.dae");
    std::fs::write(
        &stuck,
        "driver h1, h2;\nvar x1, x2;\n\
         eq f1: (x1' + x2')^2 + h1(t) = 0;\n\
         eq f2: (x1' + x2')^3 + h2(t) = 0;\n",
    )
    .unwrap();
    let out = daefix(&["fix", stuck.to_str().unwrap(), "--method", "lc"]);
    assert_eq!(out.status.code(), Some(3));

    // 3: iteration limit.
    let out = daefix(&["fix", &model_path("intro"), "--max-iter", "0"]);
    assert_eq!(out.status.code(), Some(3));
    std::fs::remove_dir_all(dir).ok();
}
