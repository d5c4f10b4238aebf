//! Document parsing, validation diagnostics, and round-trip fidelity.

use seqfn::analysis::{check_invariant, mutex_invariant, mutex_model};
use seqfn::compose::series_counters;
use seqfn::{
    check_equivalent, compile, Alphabet, CmpOp, EventSequence, MapRule, OutputMap, OutputValue,
    SequenceFunction, ValueTest,
};
use seqfn_cli::document::{parse_document, DocumentBuilder};

fn models(name: &str) -> String {
    let path = format!("{}/../../models/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn a_single_counter_document_parses() {
    let registry = parse_document(
        r#"{
            "alphabets": { "tick": ["increment", "reset"] },
            "functions": { "c10": { "kind": "counter", "modulus": 10, "alphabet": "tick" } }
        }"#,
    )
    .unwrap();
    assert_eq!(registry.functions.len(), 1);
    let c10 = &registry.functions["c10"];
    let s = EventSequence::from_symbols(c10.alphabet(), ["increment"; 12]).unwrap();
    assert_eq!(c10.evaluate(&s).unwrap(), OutputValue::Int(2));
}

#[test]
fn a_missing_step_entry_names_its_path() {
    let err = parse_document(
        r#"{
            "alphabets": { "tick": ["increment", "reset"] },
            "functions": {
                "c": {
                    "kind": "primrec",
                    "alphabet": "tick",
                    "domain": [0, 1, 2, 3],
                    "init": 0,
                    "step": {
                        "increment": { "0": 1, "1": 2, "2": 3, "3": 0 },
                        "reset": { "0": 0, "1": 0, "2": 0 }
                    }
                }
            }
        }"#,
    )
    .unwrap_err();
    assert_eq!(err.path, "functions.c.step.reset.3");
}

#[test]
fn unresolved_names_and_cycles_are_diagnosed() {
    let err = parse_document(
        r#"{ "functions": { "m": { "kind": "mapped", "inner": "ghost", "map": {} } } }"#,
    )
    .unwrap_err();
    assert_eq!(err.path, "functions.ghost");

    let err = parse_document(
        r#"{
            "functions": {
                "a": { "kind": "parallel", "parts": ["b"] },
                "b": { "kind": "parallel", "parts": ["a"] }
            }
        }"#,
    )
    .unwrap_err();
    assert!(err.message.contains("cycle"), "got: {err}");

    let err = parse_document(r#"{ "bogus": {} }"#).unwrap_err();
    assert_eq!(err.path, "bogus");
}

#[test]
fn invalid_json_is_reported_at_the_document_level() {
    let err = parse_document("{ not json").unwrap_err();
    assert_eq!(err.path, "document");
}

#[test]
fn the_series_document_matches_the_library_construction() {
    let registry = parse_document(&models("series.json")).unwrap();
    let from_doc = &registry.functions["series10"];
    let built: SequenceFunction = series_counters(10).unwrap().into();

    // Evaluation agreement on every sequence of length at most 8.
    let alphabet = built.alphabet().clone();
    let mut layer = vec![EventSequence::empty(&alphabet)];
    for _ in 0..=8 {
        let mut next = Vec::new();
        for s in &layer {
            assert_eq!(from_doc.evaluate(s).unwrap(), built.evaluate(s).unwrap());
            for event in alphabet.events() {
                next.push(s.appended(event).unwrap());
            }
        }
        layer = next;
    }

    // And exactly, through compilation.
    let left = compile(from_doc, 1000).unwrap();
    let right = compile(&built, 1000).unwrap();
    assert!(check_equivalent(&left, &right).unwrap().is_pass());
}

#[test]
fn the_mutex_document_matches_the_library_model() {
    let registry = parse_document(&models("mutex.json")).unwrap();
    for (name, n, broken) in [
        ("mutex2", 2, false),
        ("mutex2Broken", 2, true),
        ("mutex3", 3, false),
        ("mutex3Broken", 3, true),
    ] {
        let from_doc = compile(&registry.functions[name], 100_000).unwrap();
        let built = compile(&mutex_model(n, broken).unwrap().into(), 100_000).unwrap();
        assert!(
            check_equivalent(&from_doc, &built).unwrap().is_pass(),
            "{name} diverges from the library model"
        );
    }

    // The shipped predicate agrees with the library's invariant.
    let machine = &registry.machines["compiledMutex2"];
    let verdict = check_invariant(machine, &registry.predicates["mutexSafe2"], 1000).unwrap();
    assert!(verdict.is_pass());
    let library = check_invariant(machine, &mutex_invariant(2), 1000).unwrap();
    assert_eq!(verdict, library);
}

#[test]
fn functions_round_trip_through_the_document_format() {
    let mutex2: SequenceFunction = mutex_model(2, false).unwrap().into();
    let series10: SequenceFunction = series_counters(10).unwrap().into();
    let halved4 = {
        let domain: Vec<OutputValue> = (0..4).map(OutputValue::Int).collect();
        SequenceFunction::mapped(
            SequenceFunction::counter(4).unwrap(),
            OutputMap::table_from_fn(&domain, |v| OutputValue::Int(v.as_int().unwrap() % 2)),
        )
        .unwrap()
    };
    let parallel = SequenceFunction::parallel(vec![
        SequenceFunction::counter(2).unwrap(),
        SequenceFunction::counter(3).unwrap(),
    ])
    .unwrap();

    let mut builder = DocumentBuilder::new();
    builder.add_function("mutex2", &mutex2).unwrap();
    builder.add_function("series10", &series10).unwrap();
    builder.add_function("halved4", &halved4).unwrap();
    builder.add_function("parallel", &parallel).unwrap();
    let text = builder.finish().to_string();

    let registry = parse_document(&text).unwrap();
    for (name, original) in [
        ("mutex2", &mutex2),
        ("series10", &series10),
        ("halved4", &halved4),
        ("parallel", &parallel),
    ] {
        let reparsed = &registry.functions[name];
        let left = compile(original, 100_000).unwrap();
        let right = compile(reparsed, 100_000).unwrap();
        assert!(
            check_equivalent(&left, &right).unwrap().is_pass(),
            "{name} changed across the round trip"
        );
    }
}

#[test]
fn unbounded_counters_round_trip_by_evaluation() {
    let unbounded = SequenceFunction::unbounded_counter();
    let mut builder = DocumentBuilder::new();
    builder.add_function("u", &unbounded).unwrap();
    let registry = parse_document(&builder.finish().to_string()).unwrap();
    let reparsed = &registry.functions["u"];

    let alphabet = unbounded.alphabet().clone();
    let mut layer = vec![EventSequence::empty(&alphabet)];
    for _ in 0..=6 {
        let mut next = Vec::new();
        for s in &layer {
            assert_eq!(reparsed.evaluate(s).unwrap(), unbounded.evaluate(s).unwrap());
            for event in alphabet.events() {
                next.push(s.appended(event).unwrap());
            }
        }
        layer = next;
    }
}

#[test]
fn machines_and_predicates_round_trip() {
    let machine = compile(&series_counters(2).unwrap().into(), 100).unwrap();
    let predicate = mutex_invariant(2);

    let mut builder = DocumentBuilder::new();
    builder.add_machine("m", &machine).unwrap();
    builder.add_predicate("p", &predicate);
    let registry = parse_document(&builder.finish().to_string()).unwrap();

    let reparsed = &registry.machines["m"];
    assert!(check_equivalent(reparsed, &machine).unwrap().is_pass());
    assert_eq!(registry.predicates["p"], predicate);
}

#[test]
fn rule_form_maps_are_reported_as_unserializable() {
    let rules = SequenceFunction::mapped(
        SequenceFunction::unbounded_counter(),
        OutputMap::rules([
            MapRule {
                test: ValueTest::Compare(CmpOp::Eq, OutputValue::Int(0)),
                result: OutputValue::Int(0),
            },
            MapRule {
                test: ValueTest::Any,
                result: OutputValue::Int(1),
            },
        ]),
    )
    .unwrap();
    let mut builder = DocumentBuilder::new();
    let err = builder.add_function("d", &rules).unwrap_err();
    assert!(err.message.contains("rule-form"), "got: {err}");
}

#[test]
fn explicit_machine_documents_validate_totality() {
    let err = parse_document(
        r#"{
            "alphabets": { "ab": ["a", "b"] },
            "machines": {
                "m": {
                    "alphabet": "ab",
                    "states": ["s0", "s1"],
                    "start": "s0",
                    "delta": { "s0": { "a": "s1", "b": "s0" }, "s1": { "a": "s0" } },
                    "lambda": { "s0": 0, "s1": 1 }
                }
            }
        }"#,
    )
    .unwrap_err();
    assert_eq!(err.path, "machines.m.delta.s1.b");
}

#[test]
fn predicates_reject_event_atoms() {
    let err = parse_document(
        r#"{
            "predicates": {
                "p": { "op": "eq", "lhs": { "event": true }, "rhs": "x" }
            }
        }"#,
    )
    .unwrap_err();
    assert_eq!(err.path, "predicates.p.lhs");
}
