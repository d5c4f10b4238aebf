//! Acceptance criterion 8: the shipped documents parse and evaluate, and
//! the series identity, product theorem, cascade detection, and mutex
//! invariant results are all reproducible through the command-line
//! interface with the documented exit codes.

use seqfn_cli::document::parse_document;
use serde_json::Value;
use std::process::Command;

fn models(name: &str) -> String {
    format!("{}/../../models/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(doc: &str, args: &[&str]) -> (i32, Value) {
    let doc = models(doc);
    let mut full = vec!["--doc", doc.as_str()];
    full.extend_from_slice(args);
    let output = Command::new(env!("CARGO_BIN_EXE_seqfn"))
        .args(&full)
        .output()
        .expect("the driver binary runs");
    let stdout = String::from_utf8(output.stdout).expect("reports are UTF-8");
    let json: Value = serde_json::from_str(stdout.trim())
        .unwrap_or_else(|e| panic!("stdout is not valid JSON ({e}): {stdout:?}"));
    (output.status.code().expect("a real exit code"), json)
}

fn eval(doc: &str, name: &str, input: &str) -> Value {
    let (code, json) = run(doc, &["eval", name, "--input", input]);
    assert_eq!(code, 0, "eval {name} {input:?} failed: {json}");
    json["value"].clone()
}

/// Every shipped document parses into a fully validated registry, and
/// every function in it evaluates.
#[test]
fn criterion_8_documents_parse_and_evaluate() {
    for name in ["series.json", "mutex.json"] {
        let text = std::fs::read_to_string(models(name)).unwrap();
        let registry = parse_document(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!registry.functions.is_empty());
        for (fn_name, function) in &registry.functions {
            let null = seqfn::EventSequence::empty(function.alphabet());
            function
                .evaluate(&null)
                .unwrap_or_else(|e| panic!("{name}/{fn_name}: {e}"));
        }
    }
    println!("criterion 8a (documents parse and evaluate): PASS");
}

/// The series identity of criterion 1, driven through the binary: the
/// pair read off `seriesK` and the value of the squared counter satisfy
/// n + m*k = total on a spread of inputs per modulus.
#[test]
fn criterion_8_series_identity_through_the_cli() {
    let squared = [(2, "c4"), (3, "c9"), (4, "c16")];
    for (k, squared_name) in squared {
        let series_name = format!("series{k}");
        let inputs = [
            "".to_string(),
            "increment".to_string(),
            "increment*2".to_string(),
            format!("increment*{}", k - 1),
            format!("increment*{k}"),
            format!("increment*{}", k + 1),
            format!("increment*{}", k * k - 1),
            format!("increment*{}", k * k),
            format!("increment*{} reset increment*3", k + 2),
            format!("increment*{} reset", 2 * k),
            format!("reset increment*{}", 3 * k + 1),
            format!("increment*{k} increment*{k} increment", ),
        ];
        for input in &inputs {
            let pair = eval("series.json", &series_name, input);
            let n = pair[0].as_i64().unwrap();
            let m = pair[1].as_i64().unwrap();
            let total = eval("series.json", squared_name, input).as_i64().unwrap();
            assert_eq!(
                (n + m * k).rem_euclid(k * k),
                total,
                "series identity broke at k={k}, input {input:?}"
            );
        }
    }
    println!("criterion 8b (series identity via CLI): PASS");
}

/// The product theorem of criterion 2, driven through the binary.
#[test]
fn criterion_8_product_theorem_through_the_cli() {
    for (doc, pairs) in [
        ("series.json", vec![("productSeries", "compiledSeries")]),
        (
            "mutex.json",
            vec![
                ("productMutex2", "compiledMutex2"),
                ("productMutex3", "compiledMutex3"),
            ],
        ),
    ] {
        for (product, compiled) in pairs {
            let (code, json) = run(doc, &["equiv", product, compiled]);
            assert_eq!(code, 0, "equiv {product} {compiled}: {json}");
            assert_eq!(json, serde_json::json!({ "verdict": "pass" }));
        }
    }
    println!("criterion 8c (product theorem via CLI): PASS");
}

/// The cascade results of criterion 5, driven through the binary.
#[test]
fn criterion_8_cascade_detection_through_the_cli() {
    let (code, json) = run("series.json", &["cascade", "series10"]);
    assert_eq!(code, 0);
    assert_eq!(
        json,
        serde_json::json!({ "verdict": "cascade", "order": [1, 2] })
    );

    let (code, json) = run("mutex.json", &["cascade", "mutex2"]);
    assert_eq!(code, 1);
    assert_eq!(json["verdict"], "cycle");
    let witness = json["witness"].as_array().unwrap();
    assert_eq!(witness.first(), witness.last());

    let (code, json) = run("series.json", &["cascade", "parallel3"]);
    assert_eq!(code, 0);
    assert_eq!(
        json,
        serde_json::json!({ "verdict": "cascade", "order": [1, 2, 3] })
    );
    println!("criterion 8d (cascade detection via CLI): PASS");
}

/// The mutex results of criterion 7, driven through the binary.
#[test]
fn criterion_8_mutex_invariant_through_the_cli() {
    for (machine, predicate) in [
        ("compiledMutex2", "mutexSafe2"),
        ("compiledMutex3", "mutexSafe3"),
    ] {
        let (code, json) = run("mutex.json", &["invariant", machine, predicate]);
        assert_eq!(code, 0, "invariant {machine}: {json}");
        assert_eq!(json, serde_json::json!({ "verdict": "pass" }));
    }
    for (machine, predicate) in [
        ("compiledMutex2Broken", "mutexSafe2"),
        ("compiledMutex3Broken", "mutexSafe3"),
    ] {
        let (code, json) = run("mutex.json", &["invariant", machine, predicate]);
        assert_eq!(code, 1, "invariant {machine}: {json}");
        assert_eq!(json["verdict"], "fail");
        assert_eq!(json["witness"], "try(1) try(2) enter(1) enter(2)");
    }
    println!("criterion 8e (mutex invariant via CLI): PASS");
}
