use std::path::PathBuf;

use hochschild::cli::{run, EXIT_INPUT, EXIT_INTERNAL, EXIT_OK};
use serde_json::Value;

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presentations").join(format!("{name}.json")).display().to_string()
}

fn json(args: &[&str]) -> (Value, i32) {
    let out = run(std::iter::once("hochschild").chain(args.iter().copied()));
    assert!(out.stderr.is_empty(), "{}", out.stderr);
    (serde_json::from_str(&out.stdout).unwrap(), out.code)
}

fn write_temp(name: &str, body: &str) -> String {
    let path = std::env::temp_dir().join(format!("hochschild-test-{}-{name}.json", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn ground_field_is_a_single_cell() {
    let (doc, code) = json(&["compute", "--input", &corpus("ground_field_char2")]);
    assert_eq!(code, EXIT_OK);
    let nonzero: Vec<&Value> = doc["hh_table"].as_array().unwrap().iter().filter(|c| c["dim"] != 0).collect();
    assert_eq!(nonzero.len(), 1);
    assert_eq!((nonzero[0]["p"].as_i64(), nonzero[0]["q"].as_i64(), nonzero[0]["basis"][0].as_str()), (Some(0), Some(0), Some("1")));
}

#[test]
fn polynomial_ring_in_odd_characteristic() {
    // F_3[x], |x| = 2: one class x^a in (0, 2a) and one x^a u* in (1, 2a − 2).
    let (doc, _) = json(&["compute", "--input", &corpus("polynomial_1gen_deg2_char3"), "--max-p", "3", "--q-min", "-8", "--q-max", "8"]);
    for c in doc["hh_table"].as_array().unwrap() {
        let (p, q, dim) = (c["p"].as_i64().unwrap(), c["q"].as_i64().unwrap(), c["dim"].as_u64().unwrap());
        let want = match p {
            0 => q >= 0 && q % 2 == 0,
            1 => q >= -2 && q % 2 == 0,
            _ => false,
        };
        assert_eq!(dim, want as u64, "({p}, {q})");
    }
    let basis = doc["hh_table"].as_array().unwrap().iter().find(|c| c["p"] == 1 && c["q"] == 2).unwrap()["basis"].clone();
    assert_eq!(basis, serde_json::json!(["x^2.u1*"]));
}

#[test]
fn metadata_records_choices() {
    let (doc, _) = json(&["bv", "--input", &corpus("exterior_2gen_deg5_char2"), "--max-p", "3"]);
    let m = &doc["metadata"];
    assert_eq!(m["presentation_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["window"]["max_filtration"], 3);
    for key in ["diagonal_convention", "zeta_construction", "lifting_depth", "fundamental_class", "bv_evaluation"] {
        assert!(!m["choices"][key].is_null(), "{key}");
    }
    assert!(doc["hh_table"].as_array().unwrap().iter().all(|c| c["p"].is_i64() && c["q"].is_i64()));
}

#[test]
fn output_is_deterministic() {
    for cmd in ["compute", "bv", "oracle"] {
        let args = ["hochschild", cmd, "--input", &corpus("exterior_2gen_deg3_char2"), "--max-p", "3"];
        assert_eq!(run(args), run(args));
    }
    let args = ["hochschild", "verify", "--seed", "11"];
    assert_eq!(run(args), run(args));
}

#[test]
fn narrow_bar_length_excludes_edge_cells() {
    let (doc, code) = json(&["oracle", "--input", &corpus("exterior_2gen_deg5_char2"), "--max-p", "4", "--max-bar-length", "3"]);
    assert_eq!(code, EXIT_OK);
    let report = &doc["oracle_report"];
    assert!(report["note"].as_str().unwrap().starts_with("edge cells excluded"));
    assert!(report["edge_cells_excluded"].as_array().unwrap().iter().all(|c| c[0].as_i64().unwrap() >= 3));
}

#[test]
fn oracle_guard_refuses_large_windows() {
    let out = run(["hochschild", "oracle", "--input", &corpus("exterior_2gen_deg5_char2"), "--oracle-cell-limit", "10"]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("estimated cochain cell of size"), "{}", out.stderr);
}

#[test]
fn corrupted_zeta_is_caught() {
    let out = run(["hochschild", "verify", "--corrupt-zeta"]);
    assert_eq!(out.code, EXIT_INTERNAL);
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    let zeta = doc["invariants"].as_array().unwrap().iter().find(|r| r["name"] == "zeta_dual_conditions").unwrap();
    assert_eq!(zeta["passed"], false);
    assert!(zeta["witness"].as_str().unwrap().contains("residual"));
}

#[test]
fn input_errors_name_the_field() {
    let cases = [
        (r#"{"characteristic": 2, "generators": [{"name": "y", "degree": 0, "kind": "exterior"}]}"#, "generators[0].degree"),
        (r#"{"characteristic": 2, "generators": [{"name": "y", "degree": 3, "kind": "odd"}]}"#, "generators[0].kind"),
        (r#"{"characteristic": 4, "generators": []}"#, "4"),
        (r#"{"characteristic": 3, "generators": [{"name": "y", "degree": 2, "kind": "exterior"}]}"#, "y"),
        (r#"{"characteristic": 2, "generators": [{"name": "x", "degree": 2, "kind": "polynomial"}], "relations": ["x^2 + z"]}"#, "relation 0"),
        (r#"{"characteristic": 2, "generators": [], "window": {"max_filtration": -1, "q_min": 0, "q_max": 0}}"#, "window.max_filtration"),
        ("not json", "malformed"),
    ];
    for (i, (body, needle)) in cases.iter().enumerate() {
        let path = write_temp(&format!("bad{i}"), body);
        let out = run(["hochschild", "compute", "--input", &path]);
        assert_eq!(out.code, EXIT_INPUT, "{body}");
        assert!(out.stderr.contains(needle), "{body}: {}", out.stderr);
    }
    let out = run(["hochschild", "compute"]);
    assert_eq!(out.code, EXIT_INPUT);
    let out = run(["hochschild", "compute", "--input", &corpus("ground_field_char2"), "--format", "xml"]);
    assert_eq!(out.code, EXIT_INPUT);
}

#[test]
fn bv_needs_poincare_duality() {
    let out = run(["hochschild", "bv", "--input", &corpus("polynomial_1gen_deg2_char2")]);
    assert_eq!(out.code, EXIT_INPUT);
    let path = write_temp(
        "nonpd",
        r#"{"characteristic": 2, "generators": [{"name": "y1", "degree": 2, "kind": "exterior"}, {"name": "x", "degree": 2, "kind": "polynomial"}], "relations": ["x^2"]}"#,
    );
    let out = run(["hochschild", "bv", "--input", &path]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
}

#[test]
fn relations_must_be_regular() {
    let path = write_temp(
        "nonregular",
        r#"{"characteristic": 2, "generators": [{"name": "x", "degree": 2, "kind": "polynomial"}, {"name": "z", "degree": 2, "kind": "polynomial"}], "relations": ["x^2", "x*z", "z^2"]}"#,
    );
    let out = run(["hochschild", "compute", "--input", &path]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("cannot form a regular sequence"), "{}", out.stderr);
    let path = write_temp(
        "zero_divisor",
        r#"{"characteristic": 2, "generators": [{"name": "x", "degree": 2, "kind": "polynomial"}, {"name": "z", "degree": 2, "kind": "polynomial"}], "relations": ["x^2", "x*z"]}"#,
    );
    let out = run(["hochschild", "compute", "--input", &path]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("not a regular sequence"), "{}", out.stderr);
}

#[test]
fn odd_characteristic_bv_is_flagged() {
    let (doc, code) = json(&["bv", "--input", &corpus("exterior_1gen_deg3_char3"), "--max-p", "4"]);
    assert_eq!(code, EXIT_OK);
    assert!(doc["metadata"]["notes"][0].as_str().unwrap().contains("outside the scope"));
    let entry = doc["bv_table"].as_array().unwrap().iter().find(|e| e["class"] == "y1.nu1*").unwrap();
    assert_eq!(entry["delta"], serde_json::json!([["1", 2]]));
}

#[test]
fn text_format_renders_a_grid() {
    let out = run(["hochschild", "compute", "--input", &corpus("exterior_2gen_deg5_char2"), "--format", "text", "--max-p", "2"]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("q\\p"));
    assert!(out.stdout.contains("collapse: true (collapse forced by bidegree)"));
}
