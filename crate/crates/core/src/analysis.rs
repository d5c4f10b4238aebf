//! Dependency analysis and cascade detection for composites, plus
//! reachability and safety-invariant checking over explicit machines,
//! with a desk-scale mutual-exclusion model as the worked example.

use crate::alphabet::{Alphabet, EventSequence};
use crate::compose::{Composite, Guard, GuardedRule, RoutingSpec};
use crate::error::{Error, Result};
use crate::function::{PrimRecDef, SequenceFunction};
use crate::machine::MooreMachine;
use crate::value::{compare_values, CmpOp, OutputValue};
use std::collections::{BTreeSet, HashMap, VecDeque};

/// Which output slots each component's routing reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    reads: Vec<BTreeSet<usize>>,
}

impl DependencyGraph {
    pub fn component_count(&self) -> usize {
        self.reads.len()
    }

    pub fn reads(&self, component: usize) -> &BTreeSet<usize> {
        &self.reads[component]
    }

    /// True when `subset` reads no slot the other graph does not.
    pub fn refines(&self, other: &DependencyGraph) -> bool {
        self.reads.len() == other.reads.len()
            && self
                .reads
                .iter()
                .zip(&other.reads)
                .all(|(mine, theirs)| mine.is_subset(theirs))
    }
}

/// Syntactic dependency analysis: slot `j` is read by component `i` when
/// some guard in `i`'s rule list references slot `j`.
///
/// Conservative by construction — a slot reference whose truth value never
/// matters still counts — which makes it sound for certifying cascades.
pub fn dependency_graph(comp: &Composite) -> DependencyGraph {
    let routing = comp.routing();
    let reads = (0..routing.component_count())
        .map(|i| {
            let mut slots = BTreeSet::new();
            for rule in routing.rules(i) {
                collect_slots(&rule.when, &mut slots);
            }
            slots
        })
        .collect();
    DependencyGraph { reads }
}

fn collect_slots(guard: &Guard, slots: &mut BTreeSet<usize>) {
    match guard {
        Guard::And(gs) | Guard::Or(gs) => gs.iter().for_each(|g| collect_slots(g, slots)),
        Guard::Not(g) => collect_slots(g, slots),
        Guard::Event { .. } => {}
        Guard::Slot { slot, .. } => {
            slots.insert(*slot);
        }
    }
}

/// Exact dependency analysis: slot `j` is read by component `i` when its
/// emission differs on some pair of output tuples that agree everywhere
/// but at `j`. Probes every (event, output tuple) combination over the
/// declared component domains, so it needs them finite and small.
pub fn semantic_dependency_graph(comp: &Composite) -> Result<DependencyGraph> {
    const PROBE_CAP: usize = 1 << 14;
    let routing = comp.routing();
    let n = routing.component_count();
    let domains: Vec<Vec<OutputValue>> = comp
        .components()
        .iter()
        .map(|c| {
            c.enumerated_output_domain(PROBE_CAP)
                .ok_or(Error::DomainNotEnumerable)
        })
        .collect::<Result<_>>()?;

    let mut tuples: Vec<Vec<OutputValue>> = vec![Vec::new()];
    for domain in &domains {
        let mut next = Vec::with_capacity(tuples.len() * domain.len());
        for partial in &tuples {
            for value in domain {
                let mut extended = partial.clone();
                extended.push(value.clone());
                next.push(extended);
            }
        }
        tuples = next;
        if tuples.len() > PROBE_CAP {
            return Err(Error::DomainNotEnumerable);
        }
    }

    let global = routing.global_alphabet().clone();
    let mut reads: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, slots) in reads.iter_mut().enumerate() {
        for j in 0..n {
            'probe: for event in global.events() {
                for tuple in &tuples {
                    let base = routing.route(i, event, tuple)?;
                    for value in &domains[j] {
                        if value == &tuple[j] {
                            continue;
                        }
                        let mut varied = tuple.clone();
                        varied[j] = value.clone();
                        if routing.route(i, event, &varied)? != base {
                            slots.insert(j);
                            break 'probe;
                        }
                    }
                }
            }
        }
    }
    Ok(DependencyGraph { reads })
}

/// Outcome of cascade detection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cascade {
    /// A topological order of the components: information flows forward
    /// only, so the composite is a cascade. Ties break by component index.
    Order(Vec<usize>),
    /// A directed dependency cycle, listed as component indices starting
    /// and ending at the same component.
    Cycle(Vec<usize>),
}

/// Detects whether the composite is a cascade: builds the information-flow
/// digraph with an edge `j -> i` whenever component `i` reads slot `j`
/// (self-reads do not count), then either topologically orders it or
/// reports the cycle through the smallest-index component that lies on one.
pub fn cascade_order(comp: &Composite) -> Cascade {
    let graph = dependency_graph(comp);
    let n = graph.component_count();
    // successors[j] = components that read slot j.
    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree: Vec<usize> = vec![0; n];
    for i in 0..n {
        for &j in graph.reads(i) {
            if j != i {
                successors[j].push(i);
                indegree[i] += 1;
            }
        }
    }

    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&next) = ready.iter().next() {
        ready.remove(&next);
        order.push(next);
        for &reader in &successors[next] {
            indegree[reader] -= 1;
            if indegree[reader] == 0 {
                ready.insert(reader);
            }
        }
    }
    if order.len() == n {
        return Cascade::Order(order);
    }

    // Some components remain on or behind a cycle; find the shortest
    // cycle through the smallest-index component that closes one.
    for start in 0..n {
        if let Some(cycle) = shortest_cycle_through(&successors, start) {
            return Cascade::Cycle(cycle);
        }
    }
    unreachable!("a non-empty remainder implies a directed cycle")
}

fn shortest_cycle_through(successors: &[Vec<usize>], start: usize) -> Option<Vec<usize>> {
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &next in &successors[start] {
        if next == start {
            return Some(vec![start, start]);
        }
        if !parent.contains_key(&next) {
            parent.insert(next, start);
            queue.push_back(next);
        }
    }
    while let Some(node) = queue.pop_front() {
        for &next in &successors[node] {
            if next == start {
                let mut path = vec![start, node];
                let mut at = node;
                while at != start {
                    at = parent[&at];
                    path.push(at);
                }
                path.reverse();
                return Some(path);
            }
            if !parent.contains_key(&next) {
                parent.insert(next, node);
                queue.push_back(next);
            }
        }
    }
    None
}

/// States reachable from the start state, in breadth-first discovery
/// order following events in alphabet order.
pub fn reachable(machine: &MooreMachine, max_states: usize) -> Result<Vec<usize>> {
    let order = machine.bfs_order();
    if order.len() > max_states {
        return Err(Error::BoundExceeded { limit: max_states });
    }
    Ok(order)
}

/// A predicate over a machine's output tuple. Scalar outputs are treated
/// as 1-tuples, so slot 0 addresses them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Not(Box<Predicate>),
    /// Compares one output slot (optionally projected) to a constant.
    Slot {
        slot: usize,
        proj: Option<usize>,
        op: CmpOp,
        value: OutputValue,
    },
    /// Compares `|{ j in slots : output_j in values }|` to `bound`.
    Count {
        slots: Vec<usize>,
        values: Vec<OutputValue>,
        op: CmpOp,
        bound: i64,
    },
}

impl Predicate {
    pub fn count(
        slots: impl IntoIterator<Item = usize>,
        values: impl IntoIterator<Item = OutputValue>,
        op: CmpOp,
        bound: i64,
    ) -> Self {
        Predicate::Count {
            slots: slots.into_iter().collect(),
            values: values.into_iter().collect(),
            op,
            bound,
        }
    }

    pub fn slot_is(slot: usize, value: impl Into<OutputValue>) -> Self {
        Predicate::Slot {
            slot,
            proj: None,
            op: CmpOp::Eq,
            value: value.into(),
        }
    }

    /// Evaluates the predicate against one output value.
    pub fn holds(&self, output: &OutputValue) -> Result<bool> {
        let slots = output.slots();
        self.holds_on(slots)
    }

    fn holds_on(&self, slots: &[OutputValue]) -> Result<bool> {
        match self {
            Predicate::And(ps) => {
                for p in ps {
                    if !p.holds_on(slots)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Predicate::Or(ps) => {
                for p in ps {
                    if p.holds_on(slots)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Predicate::Not(p) => Ok(!p.holds_on(slots)?),
            Predicate::Slot {
                slot,
                proj,
                op,
                value,
            } => {
                let slot_value = slots.get(*slot).ok_or(Error::SlotOutOfRange {
                    slot: *slot,
                    count: slots.len(),
                })?;
                let observed = match proj {
                    None => slot_value,
                    Some(index) => slot_value
                        .as_tuple()
                        .and_then(|items| items.get(*index))
                        .ok_or_else(|| Error::BadProjection {
                            slot: *slot,
                            index: *index,
                            value: slot_value.clone(),
                        })?,
                };
                compare_values(*op, observed, value)
            }
            Predicate::Count {
                slots: members,
                values,
                op,
                bound,
            } => {
                let mut count: i64 = 0;
                for &j in members {
                    let slot_value = slots.get(j).ok_or(Error::SlotOutOfRange {
                        slot: j,
                        count: slots.len(),
                    })?;
                    if values.contains(slot_value) {
                        count += 1;
                    }
                }
                Ok(op.compare_ints(count, *bound))
            }
        }
    }
}

/// Outcome of a safety-invariant check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvariantVerdict {
    Pass,
    /// The shortlex-shortest event sequence reaching a violating state,
    /// together with that state's output.
    Fail {
        trace: EventSequence,
        output: OutputValue,
    },
}

impl InvariantVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, InvariantVerdict::Pass)
    }
}

/// Checks that `predicate` holds at the output of every reachable state,
/// the start state included. Breadth-first search in alphabet order makes
/// a returned violation trace shortlex-minimal.
pub fn check_invariant(
    machine: &MooreMachine,
    predicate: &Predicate,
    max_states: usize,
) -> Result<InvariantVerdict> {
    let alphabet = machine.alphabet().clone();
    let mut seen = vec![false; machine.state_count()];
    let mut parents: Vec<Option<(usize, u32)>> = Vec::new();
    let mut states: Vec<usize> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    if max_states == 0 {
        return Err(Error::BoundExceeded { limit: max_states });
    }
    seen[machine.start_state()] = true;
    states.push(machine.start_state());
    parents.push(None);
    queue.push_back(0);
    if !predicate.holds(machine.output(machine.start_state()))? {
        return Ok(InvariantVerdict::Fail {
            trace: EventSequence::empty(&alphabet),
            output: machine.output(machine.start_state()).clone(),
        });
    }

    while let Some(at) = queue.pop_front() {
        let state = states[at];
        for event in alphabet.ids() {
            let next = machine.successor(state, event);
            if seen[next] {
                continue;
            }
            seen[next] = true;
            let id = states.len();
            if id >= max_states {
                return Err(Error::BoundExceeded { limit: max_states });
            }
            states.push(next);
            parents.push(Some((at, event)));
            if !predicate.holds(machine.output(next))? {
                let mut ids = Vec::new();
                let mut walk = id;
                while let Some((parent, via)) = parents[walk] {
                    ids.push(via);
                    walk = parent;
                }
                ids.reverse();
                return Ok(InvariantVerdict::Fail {
                    trace: EventSequence::from_ids(&alphabet, ids),
                    output: machine.output(next).clone(),
                });
            }
            queue.push_back(id);
        }
    }
    Ok(InvariantVerdict::Pass)
}

/// A desk-scale mutual-exclusion model with `n` processes.
///
/// Each process is a three-state variable over local events
/// `{try, enter, exit}`: Idle -try-> Trying -enter-> Critical -exit-> Idle,
/// with every other pair a self-loop. The global alphabet holds
/// `try(i)`, `enter(i)`, `exit(i)` per process, grouped by action kind.
/// Routing forwards `try(i)` and `exit(i)` to process `i` unconditionally;
/// `enter(i)` reaches it only while it is Trying and no other process is
/// Critical. A failed guard emits nothing, so the attempt is a silent
/// no-op. The `broken` flag drops the no-other-Critical conjunct, which
/// makes the safety invariant falsifiable.
pub fn mutex_model(n: usize, broken: bool) -> Result<Composite> {
    if n < 2 {
        return Err(Error::TooFewProcesses(n));
    }
    let local = Alphabet::new(["try", "enter", "exit"])?;
    let idle = OutputValue::symbol("Idle");
    let trying = OutputValue::symbol("Trying");
    let critical = OutputValue::symbol("Critical");
    let domain = vec![idle.clone(), trying.clone(), critical.clone()];

    let mut step = Vec::new();
    for state in &domain {
        for event in ["try", "enter", "exit"] {
            let next = match (event, state) {
                ("try", s) if *s == idle => trying.clone(),
                ("enter", s) if *s == trying => critical.clone(),
                ("exit", s) if *s == critical => idle.clone(),
                (_, s) => s.clone(),
            };
            step.push(((event, state.clone()), next));
        }
    }
    let process: SequenceFunction =
        PrimRecDef::new(local.clone(), domain, idle, step)?.into();

    let mut global_events = Vec::with_capacity(3 * n);
    for kind in ["try", "enter", "exit"] {
        for p in 1..=n {
            global_events.push(format!("{kind}({p})"));
        }
    }
    let global = Alphabet::new(global_events)?;

    let mut rules = Vec::with_capacity(n);
    for i in 0..n {
        let p = i + 1;
        let mut enter_guard = vec![
            Guard::event_is(format!("enter({p})")),
            Guard::slot_is(i, trying.clone()),
        ];
        if !broken {
            for j in 0..n {
                if j != i {
                    enter_guard.push(Guard::Slot {
                        slot: j,
                        proj: None,
                        op: CmpOp::Ne,
                        value: critical.clone(),
                    });
                }
            }
        }
        rules.push(vec![
            GuardedRule::new(Guard::event_is(format!("try({p})")), ["try"]),
            GuardedRule::new(Guard::event_is(format!("exit({p})")), ["exit"]),
            GuardedRule::new(Guard::and(enter_guard), ["enter"]),
        ]);
    }
    let routing = RoutingSpec::new(global, vec![local; n], rules)?;
    Composite::new(vec![process; n], routing)
}

/// The mutual-exclusion invariant for an `n`-process model: at most one
/// process reads Critical.
pub fn mutex_invariant(n: usize) -> Predicate {
    Predicate::count(0..n, [OutputValue::symbol("Critical")], CmpOp::Le, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::series_counters;
    use crate::machine::{compile, find_cycle, Verdict};

    fn pass_through_composite(parts: usize) -> Composite {
        let tick = Alphabet::new(["increment", "reset"]).unwrap();
        let rules = vec![
            vec![
                GuardedRule::new(Guard::event_is("increment"), ["increment"]),
                GuardedRule::new(Guard::event_is("reset"), ["reset"]),
            ];
            parts
        ];
        let routing = RoutingSpec::new(tick.clone(), vec![tick; parts], rules).unwrap();
        let components = vec![SequenceFunction::counter(10).unwrap(); parts];
        Composite::new(components, routing).unwrap()
    }

    #[test]
    fn the_series_carry_reads_the_units_slot() {
        let graph = dependency_graph(&series_counters(10).unwrap());
        assert!(graph.reads(0).is_empty());
        assert_eq!(graph.reads(1).iter().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn constant_routing_reads_nothing() {
        let graph = dependency_graph(&pass_through_composite(3));
        for i in 0..3 {
            assert!(graph.reads(i).is_empty());
        }
    }

    #[test]
    fn mutually_guarded_components_read_each_other() {
        let tick = Alphabet::new(["go"]).unwrap();
        let rules = vec![
            vec![GuardedRule::new(Guard::slot_is(1, 0), ["go"])],
            vec![GuardedRule::new(Guard::slot_is(0, 0), ["go"])],
        ];
        let routing = RoutingSpec::new(tick.clone(), vec![tick.clone(), tick], rules).unwrap();
        let count_go = |alphabet: Alphabet| {
            // a 2-state toggle driven by "go"
            PrimRecDef::new(
                alphabet,
                vec![OutputValue::Int(0), OutputValue::Int(1)],
                OutputValue::Int(0),
                [
                    (("go", OutputValue::Int(0)), OutputValue::Int(1)),
                    (("go", OutputValue::Int(1)), OutputValue::Int(0)),
                ],
            )
            .unwrap()
            .into()
        };
        let comp = Composite::new(
            vec![
                count_go(Alphabet::new(["go"]).unwrap()),
                count_go(Alphabet::new(["go"]).unwrap()),
            ],
            routing,
        )
        .unwrap();
        let graph = dependency_graph(&comp);
        assert_eq!(graph.reads(0).iter().copied().collect::<Vec<_>>(), vec![1]);
        assert_eq!(graph.reads(1).iter().copied().collect::<Vec<_>>(), vec![0]);
        assert_eq!(cascade_order(&comp), Cascade::Cycle(vec![0, 1, 0]));
    }

    #[test]
    fn series_counters_cascade_in_index_order() {
        assert_eq!(
            cascade_order(&series_counters(10).unwrap()),
            Cascade::Order(vec![0, 1])
        );
    }

    #[test]
    fn constant_routing_cascades_in_index_order() {
        assert_eq!(
            cascade_order(&pass_through_composite(3)),
            Cascade::Order(vec![0, 1, 2])
        );
    }

    #[test]
    fn the_mutex_model_is_not_a_cascade() {
        let comp = mutex_model(2, false).unwrap();
        match cascade_order(&comp) {
            Cascade::Cycle(cycle) => {
                assert_eq!(cycle.first(), cycle.last());
                assert!(cycle.len() >= 3);
            }
            other => panic!("expected a cycle, got {other:?}"),
        }
    }

    #[test]
    fn semantic_reads_refine_syntactic_reads() {
        for comp in [
            series_counters(3).unwrap(),
            pass_through_composite(2),
            mutex_model(2, false).unwrap(),
            mutex_model(2, true).unwrap(),
        ] {
            let semantic = semantic_dependency_graph(&comp).unwrap();
            let syntactic = dependency_graph(&comp);
            assert!(semantic.refines(&syntactic));
        }
    }

    #[test]
    fn reachable_counts_states() {
        let m = compile(&SequenceFunction::counter(5).unwrap(), 100).unwrap();
        assert_eq!(reachable(&m, 100).unwrap().len(), 5);

        let tick = Alphabet::new(["a"]).unwrap();
        let single =
            MooreMachine::new(tick, 0, vec![vec![0]], vec![OutputValue::Int(0)]).unwrap();
        assert_eq!(reachable(&single, 100).unwrap().len(), 1);
        assert_eq!(
            reachable(&m, 3).unwrap_err(),
            Error::BoundExceeded { limit: 3 }
        );
    }

    #[test]
    fn the_series_product_reaches_all_four_states() {
        let comp = series_counters(2).unwrap();
        let machines: Vec<MooreMachine> = comp
            .components()
            .iter()
            .map(|c| compile(c, 10).unwrap())
            .collect();
        let m = crate::machine::product(&machines, comp.routing(), 100).unwrap();
        assert_eq!(reachable(&m, 100).unwrap().len(), 4);
    }

    #[test]
    fn sound_mutex_passes_for_two_processes() {
        let comp = mutex_model(2, false).unwrap();
        let m = compile(&comp.into(), 1000).unwrap();
        let verdict = check_invariant(&m, &mutex_invariant(2), 1000).unwrap();
        assert!(verdict.is_pass());
    }

    #[test]
    fn broken_mutex_fails_with_the_shortest_trace() {
        let comp = mutex_model(2, true).unwrap();
        let m = compile(&comp.into(), 1000).unwrap();
        match check_invariant(&m, &mutex_invariant(2), 1000).unwrap() {
            InvariantVerdict::Fail { trace, output } => {
                assert_eq!(trace.to_string(), "try(1) try(2) enter(1) enter(2)");
                assert_eq!(
                    output,
                    OutputValue::tuple([
                        OutputValue::symbol("Critical"),
                        OutputValue::symbol("Critical")
                    ])
                );
            }
            other => panic!("expected Fail, got {other:?}"),
        }
    }

    #[test]
    fn an_empty_value_set_counts_zero_everywhere() {
        let m = compile(&SequenceFunction::counter(4).unwrap(), 100).unwrap();
        let predicate = Predicate::count([0], [], CmpOp::Le, 0);
        assert!(check_invariant(&m, &predicate, 100).unwrap().is_pass());
    }

    #[test]
    fn a_violating_start_state_yields_the_empty_trace() {
        let m = compile(&SequenceFunction::counter(3).unwrap(), 100).unwrap();
        let predicate = Predicate::Slot {
            slot: 0,
            proj: None,
            op: CmpOp::Ge,
            value: OutputValue::Int(1),
        };
        match check_invariant(&m, &predicate, 100).unwrap() {
            InvariantVerdict::Fail { trace, .. } => assert!(trace.is_empty()),
            other => panic!("expected Fail, got {other:?}"),
        }
    }

    #[test]
    fn predicates_reject_bad_slots() {
        let m = compile(&SequenceFunction::counter(3).unwrap(), 100).unwrap();
        let predicate = Predicate::slot_is(4, 0i64);
        assert_eq!(
            check_invariant(&m, &predicate, 100).unwrap_err(),
            Error::SlotOutOfRange { slot: 4, count: 1 }
        );
    }

    #[test]
    fn mutex_needs_two_processes() {
        assert_eq!(mutex_model(1, false).unwrap_err(), Error::TooFewProcesses(1));
    }

    #[test]
    fn compiled_mutex_models_still_cycle() {
        let m = compile(&mutex_model(2, false).unwrap().into(), 1000).unwrap();
        assert!(matches!(find_cycle(&m), Verdict::CycleWitness { .. }));
    }
}
