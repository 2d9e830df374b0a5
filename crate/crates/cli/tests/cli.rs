use std::process::Command;

use qpriv_cli::report::ReportDocument;
use serde_json::Value;

fn qpriv(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qpriv")).args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf-8"),
        String::from_utf8(out.stderr).expect("utf-8"),
    )
}

fn json(args: &[&str]) -> (i32, Value, String) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let (code, out, _) = qpriv(&all);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}")), out)
}

fn quantity(doc: &Value, q: &str, side: &str) -> f64 {
    doc["sections"][0]["quantities"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["quantity"] == q && r["side"] == side && r["measure_after"].is_null())
        .unwrap_or_else(|| panic!("no {q} {side}"))["total"]
        .as_f64()
        .unwrap()
}

#[test]
fn ip_values() {
    let (code, doc, _) = json(&["ip", "--n", "2"]);
    assert_eq!(code, 0);
    assert!((quantity(&doc, "L", "B") - 0.75).abs() < 1e-9);
    assert!((quantity(&doc, "L", "A") - 1.548_794_940_695_398_5).abs() < 1e-9);
    let (code, doc, _) = json(&["ip", "--n", "1", "--quantity", "L"]);
    assert_eq!(code, 0);
    assert!((quantity(&doc, "L", "A") - 0.811_278_124_459_132_8).abs() < 1e-9);
    assert_eq!(doc["sections"][0]["quantities"].as_array().unwrap().len(), 2);
}

#[test]
fn first_message_constant_is_informational() {
    let (code, doc, _) = json(&["ip", "--n", "3"]);
    assert_eq!(code, 0);
    let refs = doc["sections"][0]["references"].as_array().unwrap();
    let rows: Vec<&Value> = refs.iter().filter(|r| r["label"] == "first-message entropy").collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["informational"] == true));
    assert!(rows.iter().all(|r| r["delta"].as_f64().unwrap() != 0.0));
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, err) = qpriv(&["ip", "--n", "9"]);
    assert_eq!(code, 2);
    assert!(err.contains("width cap"), "{err}");
    assert_eq!(qpriv(&["pir", "--scheme", "cube", "--n", "5", "--d", "2"]).0, 2);
    assert_eq!(qpriv(&["pir-entangled", "--ell", "3", "--database", "A6F", "--index", "1"]).0, 2);
    assert_eq!(qpriv(&["pir-entangled", "--ell", "3", "--database", "zz", "--index", "1"]).0, 2);
    assert_eq!(qpriv(&["pir-entangled", "--ell", "2", "--database", "A", "--index", "5"]).0, 2);
    assert_eq!(qpriv(&["pir-entangled", "--ell", "4"]).0, 2);
    assert_eq!(qpriv(&["ip", "--format", "yaml"]).0, 2);
    assert_eq!(qpriv(&["frobnicate"]).0, 2);
    assert_eq!(qpriv(&["pir", "--scheme", "two-server", "--n", "13"]).0, 2);
}

#[test]
fn pir_reports() {
    let (code, doc, _) = json(&["pir", "--scheme", "two-server", "--n", "4"]);
    assert_eq!(code, 0);
    let quantum = &doc["sections"][1];
    let user = quantum["quantities"].as_array().unwrap().iter().find(|q| q["party"] == "user").unwrap();
    assert!(user["total"].as_f64().unwrap().abs() < 1e-10);
    let (code, doc, _) = json(&["pir", "--scheme", "cube", "--n", "4", "--d", "2"]);
    assert_eq!(code, 0);
    assert_eq!(doc["sections"][0]["details"]["communication_bits"], 20);
    assert_eq!(doc["sections"][0]["details"]["quantum_communication_qubits"], 40);
    assert!(doc["sections"][1]["details"]["skipped"].is_string());
}

#[test]
fn entangled_pir_run() {
    let (code, doc, _) = json(&["pir-entangled", "--ell", "3", "--database", "A6", "--index", "1"]);
    assert_eq!(code, 0);
    let run = &doc["sections"][0]["details"]["run"];
    assert_eq!(run["recovered"], 1);
    assert_eq!(run["expected"], 1);
    assert_eq!(run["communication_qubits"], 13);
    assert_eq!(run["database"], "10100110");
    for x in ["0", "1", "2", "3"] {
        for i in ["1", "2"] {
            let (code, doc, _) = json(&["pir-entangled", "--ell", "1", "--database", x, "--index", i]);
            assert_eq!(code, 0, "x = {x}, i = {i}");
            let run = &doc["sections"][0]["details"]["run"];
            assert_eq!(run["recovered"], run["expected"]);
        }
    }
}

#[test]
fn json_is_deterministic_and_round_trips() {
    let args = ["ip", "--n", "2", "--t", "0,2"];
    let (_, _, first) = json(&args);
    let (_, _, second) = json(&args);
    assert_eq!(first, second);
    let doc: ReportDocument = serde_json::from_str(&first).unwrap();
    let again = serde_json::to_string_pretty(&doc).unwrap() + "\n";
    assert_eq!(again, first);
    assert_eq!(serde_json::from_str::<ReportDocument>(&again).unwrap(), doc);
    assert!(!first.contains("duration_seconds"));
    let (_, _, timed) = json(&["ip", "--n", "1", "--timing"]);
    assert!(timed.contains("duration_seconds"));
}

#[test]
fn worker_count_does_not_change_output() {
    let args = ["ip", "--n", "2", "--format", "json"];
    let run = |w: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_qpriv")).args(args).env("QPRIV_WORKERS", w).output().unwrap();
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(run("1"), run("3"));
    assert_eq!(qpriv(&["ip", "--workers", "0"]).0, 2);
}

// Required keys and primitive types along the schema's object structure.
fn conforms(schema: &Value, defs: &Value, v: &Value, path: &str) -> Result<(), String> {
    let schema = match schema.get("$ref").and_then(Value::as_str) {
        Some(r) => &defs[r.trim_start_matches("#/$defs/")],
        None => schema,
    };
    if let Some(t) = schema.get("type") {
        let types: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let ok = types.iter().any(|t| match *t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "number" => v.is_number(),
            "integer" => v.is_u64() || v.is_i64(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            _ => false,
        });
        if !ok {
            return Err(format!("{path}: expected {types:?}, got {v}"));
        }
    }
    if let Some(obj) = v.as_object() {
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            let key = key.as_str().unwrap();
            if !obj.contains_key(key) {
                return Err(format!("{path}: missing `{key}`"));
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (key, value) in obj {
            match props.and_then(|p| p.get(key)) {
                Some(sub) => conforms(sub, defs, value, &format!("{path}.{key}"))?,
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("{path}: unexpected `{key}`"))
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, item) in arr.iter().enumerate() {
            conforms(items, defs, item, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

#[test]
fn documents_follow_the_shipped_schema() {
    let schema: Value =
        serde_json::from_str(include_str!("../../../docs/report.schema.json")).expect("schema parses");
    let defs = &schema["$defs"];
    for args in [
        vec!["ip", "--n", "1"],
        vec!["pir", "--scheme", "two-server", "--n", "2", "--costs"],
        vec!["pir-entangled", "--ell", "1", "--database", "2", "--index", "1", "--costs"],
        vec!["reproduce", "framework"],
    ] {
        let (_, doc, _) = json(&args);
        conforms(&schema, defs, &doc, "$").unwrap_or_else(|e| panic!("{args:?}: {e}"));
    }
}

#[test]
fn csv_has_one_row_per_round_term() {
    let (code, out, _) = qpriv(&["ip", "--n", "1", "--quantity", "L", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let kind = headers.iter().position(|h| h == "kind").unwrap();
    let round = headers.iter().position(|h| h == "round").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let terms: Vec<&str> = rows.iter().filter(|r| &r[kind] == "term").map(|r| &r[round]).collect();
    assert_eq!(terms, ["1", "2"]);
    assert_eq!(rows.iter().filter(|r| &r[kind] == "total").count(), 2);
}

#[test]
fn config_supplies_sweeps_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, "format = \"json\"\n[ip]\nn = [1, 2]\nt = [1]\nquantity = \"L\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let (code, out, _) = qpriv(&["ip", "--config", cfg]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    let ids: Vec<&str> = doc["sections"].as_array().unwrap().iter().map(|s| s["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["ip-n1", "ip-n2", "ip-tradeoff-n1-t1", "ip-tradeoff-n2-t1"]);
    let (_, out, _) = qpriv(&["ip", "--config", cfg, "--n", "3", "--format", "table"]);
    assert!(out.contains("inner product, n = 3") && !out.contains("n = 1 =="));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[ip]\nwidth = 3\n").unwrap();
    assert_eq!(qpriv(&["ip", "--config", bad.to_str().unwrap()]).0, 2);
}

#[test]
fn reproduce_selection_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("framework.json");
    let (code, table, _) = qpriv(&["reproduce", "framework", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(table.contains("== acceptance =="));
    assert!(dir.path().join("framework.txt").exists());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let ids: Vec<u64> = doc["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [9, 10]);
}

#[test]
fn reproduce_ip_has_only_inner_product_rows() {
    let (code, doc, _) = json(&["reproduce", "ip"]);
    assert_eq!(code, 0);
    let ids: Vec<u64> = doc["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [1, 2, 3, 4, 5]);
    let informational = doc["sections"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| s["references"].as_array().unwrap())
        .filter(|r| r["label"].as_str().unwrap().starts_with("first-message entropy"))
        .count();
    assert_eq!(informational, 8);
    assert!(doc["sections"].as_array().unwrap().iter().all(|s| s["id"].as_str().unwrap().starts_with("ip-")));
}

#[test]
fn failing_checks_exit_one() {
    let (code, _, err) = qpriv(&["reproduce", "pir"]);
    assert_eq!(code, 1);
    assert!(err.contains("failing criteria"), "{err}");
    assert!(err.contains("side B"), "{err}");
}
