//! Shared corpus and brute-force helpers for the integration suites.
//! Not every suite uses every helper.
#![allow(dead_code)]

use seqfn::analysis::mutex_model;
use seqfn::compose::series_counters;
use seqfn::{
    Alphabet, CmpOp, Composite, EventSequence, Guard, GuardedRule, MapRule, MooreMachine,
    OutputMap, OutputValue, RoutingSpec, SequenceFunction, ValueTest,
};

pub fn counter(k: i64) -> SequenceFunction {
    SequenceFunction::counter(k).unwrap()
}

/// The zero/nonzero view of a counter, in rule form.
pub fn zero_nonzero(k: i64) -> SequenceFunction {
    SequenceFunction::mapped(
        counter(k),
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
    .unwrap()
}

/// A counter reduced mod 2, in table form.
pub fn halved(k: i64) -> SequenceFunction {
    let domain: Vec<OutputValue> = (0..k).map(OutputValue::Int).collect();
    SequenceFunction::mapped(
        counter(k),
        OutputMap::table_from_fn(&domain, |v| OutputValue::Int(v.as_int().unwrap() % 2)),
    )
    .unwrap()
}

/// Compilable functions exercised across the machine-level suites.
pub fn corpus() -> Vec<(&'static str, SequenceFunction)> {
    vec![
        ("counter2", counter(2)),
        ("counter3", counter(3)),
        ("counter5", counter(5)),
        ("counter10", counter(10)),
        ("zero_nonzero5", zero_nonzero(5)),
        ("halved4", halved(4)),
        (
            "parallel23",
            SequenceFunction::parallel(vec![counter(2), counter(3)]).unwrap(),
        ),
        ("series2", series_counters(2).unwrap().into()),
        ("series3", series_counters(3).unwrap().into()),
        ("mutex2", mutex_model(2, false).unwrap().into()),
    ]
}

/// All sequences over `alphabet` up to `max_len`, in shortlex order.
pub fn all_sequences(alphabet: &Alphabet, max_len: usize) -> Vec<EventSequence> {
    let mut out = vec![EventSequence::empty(alphabet)];
    let mut layer_start = 0;
    for _ in 0..max_len {
        let layer_end = out.len();
        for i in layer_start..layer_end {
            for event in alphabet.events() {
                out.push(out[i].appended(event).unwrap());
            }
        }
        layer_start = layer_end;
    }
    out
}

/// All sequences strictly shortlex-smaller than `witness`.
pub fn shortlex_below(witness: &EventSequence) -> Vec<EventSequence> {
    all_sequences(witness.alphabet(), witness.len())
        .into_iter()
        .take_while(|s| s != witness)
        .collect()
}

/// Number of increments since the last reset, the paper-free counter
/// oracle: what a mod-`k` counter must read after `s`.
pub fn counter_oracle(s: &EventSequence, k: i64) -> i64 {
    let mut count: i64 = 0;
    for symbol in s.symbols() {
        match symbol {
            "increment" => count += 1,
            "reset" => count = 0,
            _ => {}
        }
    }
    count.rem_euclid(k)
}

/// Digit-split oracle for the series pair: run a single mod-k^2 counter
/// and split its value into (units, carries).
pub fn series_oracle(s: &EventSequence, k: i64) -> OutputValue {
    let total = counter(k * k).evaluate(s).unwrap().as_int().unwrap();
    OutputValue::tuple([OutputValue::Int(total % k), OutputValue::Int(total / k)])
}

/// A composite whose routing forwards every global event to every
/// component unchanged: constant rules, no slot reads.
pub fn pass_through_composite(parts: usize) -> Composite {
    let tick = Alphabet::new(["increment", "reset"]).unwrap();
    let rules = vec![
        vec![
            GuardedRule::new(Guard::event_is("increment"), ["increment"]),
            GuardedRule::new(Guard::event_is("reset"), ["reset"]),
        ];
        parts
    ];
    let routing = RoutingSpec::new(tick.clone(), vec![tick; parts], rules).unwrap();
    Composite::new(vec![counter(10); parts], routing).unwrap()
}

/// Rebuilds a machine with one transition redirected.
pub fn with_redirected_transition(
    machine: &MooreMachine,
    state: usize,
    event: u32,
    target: usize,
) -> MooreMachine {
    let delta: Vec<Vec<usize>> = (0..machine.state_count())
        .map(|s| {
            (0..machine.alphabet().len() as u32)
                .map(|e| {
                    if s == state && e == event {
                        target
                    } else {
                        machine.successor(s, e)
                    }
                })
                .collect()
        })
        .collect();
    let lambda = (0..machine.state_count())
        .map(|s| machine.output(s).clone())
        .collect();
    MooreMachine::new(machine.alphabet().clone(), machine.start_state(), delta, lambda).unwrap()
}
