use serde_json::Value;

use centerfocus_core::classify::{
    analyze, corpus_names, corpus_system, emit_report, run_corpus, FixtureError, ReportFormat, SystemFile,
    SCHEMA_VERSION,
};

fn json_of(s: &SystemFile) -> (Vec<u8>, Value) {
    let r = analyze(s, &s.config().unwrap()).unwrap();
    let bytes = emit_report(&r, ReportFormat::Json);
    let v: Value = serde_json::from_slice(&bytes).expect("report is valid JSON");
    (bytes, v)
}

fn assert_schema(v: &Value, name: &str) {
    assert_eq!(v["schema"], SCHEMA_VERSION, "{name}");
    for key in ["system", "config", "monodromy", "weights", "returns", "eta", "evidence", "verdict", "errors", "invariant_violations"] {
        assert!(v.get(key).is_some(), "{name}: missing {key}");
    }
    let kind = v["verdict"]["kind"].as_str().unwrap();
    assert!(["center", "focus", "inconclusive"].contains(&kind), "{name}: verdict {kind}");
    assert!(v["verdict"]["rule"].is_string(), "{name}");
}

#[test]
fn json_report_is_byte_identical_across_runs() {
    let s = corpus_system("andreev").unwrap().unwrap();
    assert_eq!(json_of(&s).0, json_of(&s).0);
}

#[test]
fn json_keys_are_sorted() {
    let s = corpus_system("linear").unwrap().unwrap();
    let (bytes, v) = json_of(&s);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    // Re-serializing the parsed value must not reorder anything.
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.find("\"config\"").unwrap() < text.find("\"verdict\"").unwrap());
}

#[test]
fn center_report_carries_two_kinds_of_evidence() {
    let s = corpus_system("andreev").unwrap().unwrap();
    let (_, v) = json_of(&s);
    assert_eq!(v["verdict"]["kind"], "center");
    assert!(v["evidence"].as_array().unwrap().len() >= 2);
    assert!(v["invariant_violations"].as_array().unwrap().is_empty());
}

#[test]
fn every_corpus_report_follows_the_schema() {
    for name in corpus_names() {
        let s = corpus_system(name).unwrap().unwrap();
        let (_, v) = json_of(&s);
        assert_schema(&v, name);
    }
}

#[test]
fn error_paths_still_produce_reports() {
    let saddle = SystemFile::parse("[system]\nP = [[1, 0, \"1\"]]\nQ = [[0, 1, \"-1\"]]\n").unwrap();
    let (_, v) = json_of(&saddle);
    assert_schema(&v, "saddle");
    assert_eq!(v["verdict"]["rule"], "monodromy-violated");
    assert_eq!(v["monodromy"]["monodromic"], false);

    let shared = SystemFile::parse("[system]\nP = [[1, 1, \"1\"]]\nQ = [[2, 0, \"1\"]]\n").unwrap();
    let (_, v) = json_of(&shared);
    assert_schema(&v, "common factor");
    assert_eq!(v["verdict"]["rule"], "degenerate-input");
    assert!(!v["errors"].as_array().unwrap().is_empty());

    let qh = corpus_system("quasihomogeneous").unwrap().unwrap();
    let qh = qh.with_params([("A", "1"), ("B", "1"), ("C", "-1"), ("D", "-3")]).unwrap();
    let (_, v) = json_of(&qh);
    assert_schema(&v, "real root");
    assert_eq!(v["verdict"]["kind"], "inconclusive");
    assert_eq!(v["verdict"]["rule"], "monodromy-violated");
}

#[test]
fn malformed_input_is_an_error() {
    assert!(SystemFile::parse("[system\nP=").is_err());
    let zero = SystemFile::parse("[system]\nP = [[1, 0, \"a\"]]\nQ = []\n[params]\na = \"0\"\n").unwrap();
    assert!(analyze(&zero, &zero.config().unwrap()).is_err());
    let nonsingular = SystemFile::parse("[system]\nP = [[0, 0, \"1\"]]\nQ = [[1, 0, \"1\"]]\n").unwrap();
    assert!(analyze(&nonsingular, &nonsingular.config().unwrap()).is_err());
}

#[test]
fn unknown_fixture_is_reported() {
    assert!(matches!(run_corpus(Some("nope")), Err(FixtureError::Missing(n)) if n == "nope"));
}

#[test]
fn linear_fixture_passes() {
    let out = run_corpus(Some("linear")).unwrap();
    assert_eq!(out.len(), 1);
    assert!(out[0].passed(), "{:?}", out[0].checks);
}
