//! Acceptance suite. Each test covers one numbered criterion, checks it
//! at the stated exact tolerance, and prints a pass line on success; the
//! test name carries the criterion number, so the harness output gives
//! one pass/fail line per criterion either way.

mod common;

use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use seqfn::analysis::{
    cascade_order, check_invariant, mutex_invariant, mutex_model, Cascade, InvariantVerdict,
    Predicate,
};
use seqfn::compose::series_counters;
use seqfn::{
    check_equivalent, check_implements, compile, product, Alphabet, CmpOp, Composite,
    EventSequence, Evaluator, Guard, GuardedRule, MooreMachine, OutputValue, PrimRecDef,
    RoutingSpec, SequenceFunction, Verdict,
};

/// Criterion 1: for k in {2,3,4} and every sequence over
/// {increment, reset} of length at most 10, the series pair (n, m)
/// satisfies (n + m*k) mod k^2 = the value of a single mod-k^2 counter.
#[test]
fn criterion_1_series_counter_identity() {
    for k in [2i64, 3, 4] {
        let comp = series_counters(k).unwrap();
        let squared = counter(k * k);
        let mut checked = 0usize;
        for s in all_sequences(comp.global_alphabet(), 10) {
            let output = comp.evaluate(&s).unwrap();
            let slots = output.as_tuple().expect("series output is a pair");
            let (n, m) = (slots[0].as_int().unwrap(), slots[1].as_int().unwrap());
            assert_eq!(
                OutputValue::Int((n + m * k).rem_euclid(k * k)),
                squared.evaluate(&s).unwrap(),
                "series identity broke at k={k}, s={s}"
            );
            checked += 1;
        }
        assert_eq!(checked, (1 << 11) - 1);
    }
    println!("criterion 1 (series-counter identity): PASS");
}

/// Walks every sequence of length at most `depth`, asserting that the
/// machine's output along the path equals the function's.
fn assert_machine_agrees_everywhere(
    machine: &MooreMachine,
    function: &SequenceFunction,
    depth: usize,
) {
    fn recurse(
        machine: &MooreMachine,
        state: usize,
        evaluator: &Evaluator,
        depth_left: usize,
    ) {
        assert_eq!(machine.output(state), &evaluator.output().unwrap());
        if depth_left == 0 {
            return;
        }
        for event in 0..machine.alphabet().len() as u32 {
            let mut next = evaluator.clone();
            next.step(machine.alphabet().symbol(event)).unwrap();
            recurse(machine, machine.successor(state, event), &next, depth_left - 1);
        }
    }
    recurse(
        machine,
        machine.start_state(),
        &Evaluator::new(function),
        depth,
    );
}

fn random_guard(rng: &mut StdRng, components: usize, global: &Alphabet, depth: usize) -> Guard {
    let choice = if depth == 0 {
        rng.random_range(0..2)
    } else {
        rng.random_range(0..5)
    };
    match choice {
        0 => Guard::event_is(global.events()[rng.random_range(0..global.len())].clone()),
        1 => {
            let ops = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
            Guard::Slot {
                slot: rng.random_range(0..components),
                proj: None,
                op: ops[rng.random_range(0..ops.len())],
                value: OutputValue::Int(rng.random_range(0..6)),
            }
        }
        2 => Guard::and([
            random_guard(rng, components, global, depth - 1),
            random_guard(rng, components, global, depth - 1),
        ]),
        3 => Guard::or([
            random_guard(rng, components, global, depth - 1),
            random_guard(rng, components, global, depth - 1),
        ]),
        _ => Guard::not(random_guard(rng, components, global, depth - 1)),
    }
}

fn random_composite(rng: &mut StdRng) -> Composite {
    let components = rng.random_range(2..=3usize);
    let global =
        Alphabet::new((0..rng.random_range(2..=3usize)).map(|i| format!("g{i}"))).unwrap();

    let mut parts: Vec<SequenceFunction> = Vec::new();
    let mut locals: Vec<Alphabet> = Vec::new();
    for _ in 0..components {
        let local =
            Alphabet::new((0..rng.random_range(1..=2usize)).map(|i| format!("a{i}"))).unwrap();
        let size = rng.random_range(1..=6usize) as i64;
        let domain: Vec<OutputValue> = (0..size).map(OutputValue::Int).collect();
        let init = domain[rng.random_range(0..domain.len())].clone();
        let mut step = Vec::new();
        for event in local.events() {
            for value in &domain {
                step.push((
                    (event.clone(), value.clone()),
                    domain[rng.random_range(0..domain.len())].clone(),
                ));
            }
        }
        parts.push(PrimRecDef::new(local.clone(), domain, init, step).unwrap().into());
        locals.push(local);
    }

    let mut rules = Vec::new();
    for local in &locals {
        let mut component_rules = Vec::new();
        for _ in 0..rng.random_range(0..=3usize) {
            let guard = random_guard(rng, components, &global, 2);
            let emit: Vec<String> = (0..rng.random_range(0..=2usize))
                .map(|_| local.events()[rng.random_range(0..local.len())].clone())
                .collect();
            component_rules.push(GuardedRule::new(guard, emit));
        }
        rules.push(component_rules);
    }
    let routing = RoutingSpec::new(global, locals, rules).unwrap();
    Composite::new(parts, routing).unwrap()
}

/// Criterion 2: the routed product of the compiled components is
/// equivalent to the compiled composite, and both match the composite's
/// own evaluation on every sequence of length at most 6 — for the series
/// pair, the mutex models, and twenty seeded random composites.
#[test]
fn criterion_2_product_theorem() {
    let mut cases: Vec<(String, Composite)> = vec![
        ("series10".into(), series_counters(10).unwrap()),
        ("mutex2".into(), mutex_model(2, false).unwrap()),
        ("mutex3".into(), mutex_model(3, false).unwrap()),
    ];
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for i in 0..20 {
        cases.push((format!("random{i}"), random_composite(&mut rng)));
    }

    for (name, comp) in cases {
        let machines: Vec<MooreMachine> = comp
            .components()
            .iter()
            .map(|c| compile(c, 100_000).unwrap())
            .collect();
        let routed = product(&machines, comp.routing(), 100_000).unwrap();
        let function: SequenceFunction = comp.into();
        let compiled = compile(&function, 100_000).unwrap();
        assert_eq!(
            check_equivalent(&routed, &compiled).unwrap(),
            Verdict::Pass,
            "{name}: the product and the compiled composite separated"
        );
        assert_machine_agrees_everywhere(&routed, &function, 6);
    }
    println!("criterion 2 (product theorem): PASS");
}

/// States `a` and `b` of `machine` behave identically.
fn states_equivalent(machine: &MooreMachine, a: usize, b: usize) -> bool {
    let rebase = |start: usize| {
        let delta = (0..machine.state_count())
            .map(|s| {
                (0..machine.alphabet().len() as u32)
                    .map(|e| machine.successor(s, e))
                    .collect()
            })
            .collect();
        let lambda = (0..machine.state_count())
            .map(|s| machine.output(s).clone())
            .collect();
        MooreMachine::new(machine.alphabet().clone(), start, delta, lambda).unwrap()
    };
    check_equivalent(&rebase(a), &rebase(b)).unwrap().is_pass()
}

/// Criterion 3: every corpus function passes an exact implementation
/// check against its own compilation, and redirecting any single
/// transition to a behaviorally different state flips the verdict to a
/// Fail whose witness replays against the function.
#[test]
fn criterion_3_compile_soundness() {
    for (name, function) in corpus() {
        let machine = compile(&function, 100_000).unwrap();
        assert_eq!(
            check_implements(&machine, &function, 12).unwrap(),
            Verdict::Pass,
            "{name}: compiled machine does not implement its function"
        );

        let n = machine.state_count();
        assert!(n >= 2, "{name}: corpus machines must be corruptible");
        for state in 0..n {
            for event in 0..machine.alphabet().len() as u32 {
                let original = machine.successor(state, event);
                for target in 0..n {
                    if target == original || states_equivalent(&machine, target, original) {
                        continue;
                    }
                    let corrupted =
                        with_redirected_transition(&machine, state, event, target);
                    match check_implements(&corrupted, &function, 12).unwrap() {
                        Verdict::Fail { witness, .. } => {
                            let (_, got) = corrupted.run(&witness).unwrap();
                            assert_ne!(
                                got,
                                function.evaluate(&witness).unwrap(),
                                "{name}: witness does not replay"
                            );
                        }
                        other => panic!(
                            "{name}: corrupting delta({state}, {event}) -> {target} \
                             went undetected: {other:?}"
                        ),
                    }
                }
            }
        }
    }
    println!("criterion 3 (compile soundness under corruption): PASS");
}

/// Criterion 4: mod-2 equals mod-4-then-halve; mod 2 and mod 3 separate
/// with a two-increment witness.
#[test]
fn criterion_4_equivalence_sanity() {
    let two = compile(&counter(2), 100).unwrap();
    let four_halved = compile(&halved(4), 100).unwrap();
    assert_eq!(check_equivalent(&two, &four_halved).unwrap(), Verdict::Pass);

    let three = compile(&counter(3), 100).unwrap();
    match check_equivalent(&two, &three).unwrap() {
        Verdict::Fail { witness, .. } => {
            assert_eq!(witness.len(), 2);
            assert_eq!(witness.to_string(), "increment increment");
        }
        other => panic!("expected Fail, got {other:?}"),
    }
    println!("criterion 4 (equivalence sanity): PASS");
}

/// Criterion 5: the series pair cascades in index order, the mutex model
/// does not cascade, and constant routing cascades in identity order.
#[test]
fn criterion_5_cascade_detection() {
    assert_eq!(
        cascade_order(&series_counters(10).unwrap()),
        Cascade::Order(vec![0, 1])
    );
    match cascade_order(&mutex_model(2, false).unwrap()) {
        Cascade::Cycle(cycle) => assert_eq!(cycle.first(), cycle.last()),
        other => panic!("expected a cycle, got {other:?}"),
    }
    assert_eq!(
        cascade_order(&pass_through_composite(3)),
        Cascade::Order(vec![0, 1, 2])
    );
    println!("criterion 5 (cascade detection): PASS");
}

/// Criterion 6: every compiled corpus machine has a state cycle, and each
/// witness replays to a true cycle.
#[test]
fn criterion_6_pigeonhole_cycle_law() {
    for (name, function) in corpus() {
        let machine = compile(&function, 100_000).unwrap();
        match seqfn::find_cycle(&machine) {
            Verdict::CycleWitness { states, events } => {
                assert_eq!(states.len(), events.len(), "{name}: malformed witness");
                let mut at = states[0];
                for (i, event) in events.symbols().enumerate() {
                    assert_eq!(at, states[i], "{name}: witness states drift");
                    let id = machine.alphabet().index_of(event).unwrap();
                    at = machine.successor(at, id);
                }
                assert_eq!(at, states[0], "{name}: witness does not close");
                let (reached, _) = machine.run_from(states[0], &events).unwrap();
                assert_eq!(reached, states[0]);
            }
            other => panic!("{name}: expected a cycle witness, got {other:?}"),
        }
    }
    println!("criterion 6 (pigeonhole cycle law): PASS");
}

/// Checks the predicate at every node of the sequence tree up to `depth`.
fn assert_invariant_everywhere(
    function: &SequenceFunction,
    predicate: &Predicate,
    depth: usize,
) {
    fn recurse(
        evaluator: &Evaluator,
        alphabet: &Alphabet,
        predicate: &Predicate,
        depth_left: usize,
    ) {
        assert!(predicate.holds(&evaluator.output().unwrap()).unwrap());
        if depth_left == 0 {
            return;
        }
        for event in alphabet.events() {
            let mut next = evaluator.clone();
            next.step(event).unwrap();
            recurse(&next, alphabet, predicate, depth_left - 1);
        }
    }
    recurse(
        &Evaluator::new(function),
        function.alphabet(),
        predicate,
        depth,
    );
}

/// The shortlex-first sequence of length at most `depth` whose output
/// violates the predicate, by iterative deepening in alphabet order.
fn first_violation(
    function: &SequenceFunction,
    predicate: &Predicate,
    depth: usize,
) -> Option<EventSequence> {
    fn at_exact_length(
        evaluator: &Evaluator,
        alphabet: &Alphabet,
        predicate: &Predicate,
        remaining: usize,
        path: &mut Vec<String>,
    ) -> bool {
        if remaining == 0 {
            return !predicate.holds(&evaluator.output().unwrap()).unwrap();
        }
        for event in alphabet.events() {
            let mut next = evaluator.clone();
            next.step(event).unwrap();
            path.push(event.clone());
            if at_exact_length(&next, alphabet, predicate, remaining - 1, path) {
                return true;
            }
            path.pop();
        }
        false
    }

    let alphabet = function.alphabet();
    for length in 0..=depth {
        let mut path = Vec::new();
        if at_exact_length(
            &Evaluator::new(function),
            alphabet,
            predicate,
            length,
            &mut path,
        ) {
            return Some(EventSequence::from_symbols(alphabet, path).unwrap());
        }
    }
    None
}

/// Criterion 7: the sound mutex model keeps its invariant for two and
/// three processes; the broken one fails with the shortlex-shortest
/// trace, confirmed for two processes by brute force over every sequence
/// of length at most 8.
#[test]
fn criterion_7_mutex_invariant() {
    for n in [2, 3] {
        let sound: SequenceFunction = mutex_model(n, false).unwrap().into();
        let machine = compile(&sound, 100_000).unwrap();
        assert!(
            check_invariant(&machine, &mutex_invariant(n), 100_000)
                .unwrap()
                .is_pass(),
            "sound mutex model violated safety at n={n}"
        );

        let broken: SequenceFunction = mutex_model(n, true).unwrap().into();
        let machine = compile(&broken, 100_000).unwrap();
        match check_invariant(&machine, &mutex_invariant(n), 100_000).unwrap() {
            InvariantVerdict::Fail { trace, .. } => {
                assert_eq!(trace.to_string(), "try(1) try(2) enter(1) enter(2)");
            }
            other => panic!("broken mutex model passed at n={n}: {other:?}"),
        }
    }

    // Brute force at n=2: the sound model has no violation of length at
    // most 8; the broken model's shortlex-first violation matches the
    // checker's trace exactly.
    let sound: SequenceFunction = mutex_model(2, false).unwrap().into();
    assert_invariant_everywhere(&sound, &mutex_invariant(2), 8);

    let broken: SequenceFunction = mutex_model(2, true).unwrap().into();
    let found = first_violation(&broken, &mutex_invariant(2), 8)
        .expect("the broken model must violate within depth 8");
    assert_eq!(found.to_string(), "try(1) try(2) enter(1) enter(2)");
    println!("criterion 7 (mutex invariant): PASS");
}
