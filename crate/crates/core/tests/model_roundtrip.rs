//! Structural round trips: writing a system in the model grammar and
//! reparsing it must preserve Σ, valΣ, the offsets and both BTFs — for
//! the bundled models and for every converted output.

use daefix_core::btf::{coarse_btf, fine_btf, jacobian_pattern, occurrence_pattern};
use daefix_core::convert::{fix_dae, FixOptions, Method};
use daefix_core::model::{parse_model, write_model};
use daefix_core::structure::{analyze_sigma, signature_matrix, DaeSystem};

fn model(name: &str) -> DaeSystem {
    let path = format!("{}/../../models/{name}.dae", env!("CARGO_MANIFEST_DIR"));
    parse_model(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_structurally_equal(a: &DaeSystem, b: &DaeSystem) {
    assert_eq!(a.n(), b.n());
    let sig_a = signature_matrix(a);
    let sig_b = signature_matrix(b);
    assert_eq!(sig_a.entries, sig_b.entries);
    let an_a = analyze_sigma(&sig_a).unwrap();
    let an_b = analyze_sigma(&sig_b).unwrap();
    assert_eq!(an_a.val, an_b.val);
    assert_eq!(an_a.offsets, an_b.offsets);
    let fine_a = fine_btf(&jacobian_pattern(&an_a)).unwrap();
    let fine_b = fine_btf(&jacobian_pattern(&an_b)).unwrap();
    assert_eq!(fine_a.sizes, fine_b.sizes);
    assert_eq!(fine_a.rows, fine_b.rows);
    let coarse_a = coarse_btf(&occurrence_pattern(&sig_a)).unwrap();
    let coarse_b = coarse_btf(&occurrence_pattern(&sig_b)).unwrap();
    assert_eq!(coarse_a.sizes, coarse_b.sizes);
}

#[test]
fn bundled_models_round_trip() {
    for name in ["intro", "robotarm", "transamp", "ringmod", "mod2pend"] {
        let sys = model(name);
        let reparsed = parse_model(&write_model(&sys)).unwrap();
        assert_structurally_equal(&sys, &reparsed);
    }
}

#[test]
fn converted_models_round_trip() {
    for name in ["intro", "robotarm", "transamp", "ringmod"] {
        for method in [Method::Lc, Method::Es] {
            let sys = model(name);
            let report = fix_dae(
                &sys,
                &FixOptions {
                    method,
                    ..FixOptions::default()
                },
            )
            .unwrap();
            let text = write_model(&report.system);
            let reparsed = parse_model(&text).unwrap();
            assert_structurally_equal(&report.system, &reparsed);
            // Introduced variables keep their y_/g_ names through the text.
            if method == Method::Es {
                assert!(text.contains("y_"));
                assert!(text.contains("eq g_"));
            }
        }
    }
}
