//! Explicit Moore machines and the checks that connect them back to
//! sequence functions: compilation by reachable-configuration search, the
//! routed product of component machines, equivalence and implementation
//! checking with shortlex-minimal witnesses, and state-cycle detection.

use crate::alphabet::{Alphabet, EventSequence};
use crate::compose::RoutingSpec;
use crate::error::{Error, Result};
use crate::function::{Config, SequenceFunction};
use crate::value::OutputValue;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

/// Default state bound used when compiling for an exact check.
pub const DEFAULT_MAX_STATES: usize = 100_000;

/// Default sequence-length bound for implementation checks that cannot
/// run exactly.
pub const DEFAULT_IMPLEMENTS_DEPTH: usize = 12;

/// An explicit Moore machine: finite states, a total transition table,
/// and an output per state. States are dense indices `0..state_count()`;
/// machines built by [`compile`] and [`product`] number states in
/// breadth-first discovery order and label them with the configuration
/// they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MooreMachine {
    alphabet: Alphabet,
    output_set: Vec<OutputValue>,
    start: usize,
    delta: Vec<Vec<usize>>,
    lambda: Vec<OutputValue>,
    labels: Vec<String>,
}

impl MooreMachine {
    /// Builds a machine from explicit parts. `delta` must hold one row per
    /// state and one successor per event, in alphabet order.
    pub fn new(
        alphabet: Alphabet,
        start: usize,
        delta: Vec<Vec<usize>>,
        lambda: Vec<OutputValue>,
    ) -> Result<Self> {
        let n = delta.len();
        if n == 0 {
            return Err(Error::NoStates);
        }
        if start >= n {
            return Err(Error::StateOutOfRange(start));
        }
        if lambda.len() != n {
            return Err(Error::DeltaIncomplete);
        }
        for row in &delta {
            if row.len() != alphabet.len() {
                return Err(Error::DeltaIncomplete);
            }
            for &target in row {
                if target >= n {
                    return Err(Error::StateOutOfRange(target));
                }
            }
        }
        let output_set = dedup_outputs(&lambda);
        let labels = (0..n).map(|i| i.to_string()).collect();
        Ok(MooreMachine {
            alphabet,
            output_set,
            start,
            delta,
            lambda,
            labels,
        })
    }

    /// Replaces the declared output set; it must cover every state output.
    pub fn with_output_set(mut self, output_set: Vec<OutputValue>) -> Result<Self> {
        for output in &self.lambda {
            if !output_set.contains(output) {
                return Err(Error::OutputOutsideSet(output.clone()));
            }
        }
        self.output_set = output_set;
        Ok(self)
    }

    /// Replaces the per-state labels kept for readable reports.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.state_count() {
            return Err(Error::DeltaIncomplete);
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    pub fn start_state(&self) -> usize {
        self.start
    }

    pub fn output_set(&self) -> &[OutputValue] {
        &self.output_set
    }

    pub fn output(&self, state: usize) -> &OutputValue {
        &self.lambda[state]
    }

    pub fn label(&self, state: usize) -> &str {
        &self.labels[state]
    }

    /// The successor of `state` under the event with index `event`.
    pub fn successor(&self, state: usize, event: u32) -> usize {
        self.delta[state][event as usize]
    }

    /// Runs `s` from the start state; returns the state reached and its
    /// output.
    pub fn run(&self, s: &EventSequence) -> Result<(usize, OutputValue)> {
        self.run_from(self.start, s)
    }

    /// Runs `s` from an arbitrary state.
    pub fn run_from(&self, state: usize, s: &EventSequence) -> Result<(usize, OutputValue)> {
        if state >= self.state_count() {
            return Err(Error::StateOutOfRange(state));
        }
        let ids = s.ids_in(&self.alphabet)?;
        let mut current = state;
        for &id in ids.iter() {
            current = self.delta[current][id as usize];
        }
        Ok((current, self.lambda[current].clone()))
    }

    /// States in breadth-first discovery order from the start state,
    /// following events in alphabet order.
    pub(crate) fn bfs_order(&self) -> Vec<usize> {
        let mut seen = vec![false; self.state_count()];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        seen[self.start] = true;
        queue.push_back(self.start);
        while let Some(state) = queue.pop_front() {
            order.push(state);
            for event in self.alphabet.ids() {
                let next = self.delta[state][event as usize];
                if !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        order
    }

    /// The transition graph in DOT form; node labels read `id:output`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph moore {\n  rankdir=LR;\n");
        let _ = writeln!(out, "  __start [shape=point];");
        let _ = writeln!(out, "  __start -> {};", self.start);
        for state in 0..self.state_count() {
            let _ = writeln!(
                out,
                "  {} [label=\"{}:{}\"];",
                state, state, self.lambda[state]
            );
        }
        for state in 0..self.state_count() {
            for event in self.alphabet.ids() {
                let _ = writeln!(
                    out,
                    "  {} -> {} [label=\"{}\"];",
                    state,
                    self.delta[state][event as usize],
                    self.alphabet.symbol(event)
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

fn dedup_outputs(lambda: &[OutputValue]) -> Vec<OutputValue> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for value in lambda {
        if seen.insert(value.clone()) {
            out.push(value.clone());
        }
    }
    out
}

/// Result of a machine check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// The two sides disagree on `witness`, the shortlex-minimal
    /// separating sequence under the alphabet order.
    Fail {
        witness: EventSequence,
        expected: OutputValue,
        actual: OutputValue,
    },
    /// A state cycle: running `events` from `states[0]` walks `states`
    /// and returns to `states[0]`.
    CycleWitness {
        states: Vec<usize>,
        events: EventSequence,
    },
    /// A state bound stopped the check before it finished.
    BoundExceeded { limit: usize },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Compiles a sequence function into an explicit Moore machine by
/// breadth-first exploration of its reachable configurations, following
/// events in alphabet order. States are numbered in discovery order and
/// the machine's output agrees with the function on every sequence.
pub fn compile(function: &SequenceFunction, max_states: usize) -> Result<MooreMachine> {
    if function.has_unbounded_domain() {
        return Err(Error::UnboundedDomain);
    }
    let alphabet = function.alphabet().clone();
    let initial = function.initial_config();

    let mut index: HashMap<Config, usize> = HashMap::new();
    let mut configs: Vec<Config> = Vec::new();
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    index.insert(initial.clone(), 0);
    configs.push(initial);
    queue.push_back(0);
    if max_states == 0 {
        return Err(Error::BoundExceeded { limit: max_states });
    }

    while let Some(state) = queue.pop_front() {
        let mut row = Vec::with_capacity(alphabet.len());
        for event in alphabet.ids() {
            let config = configs[state].clone();
            let next = function.step_config(&config, event)?;
            let target = match index.get(&next) {
                Some(&existing) => existing,
                None => {
                    let id = configs.len();
                    if id >= max_states {
                        return Err(Error::BoundExceeded { limit: max_states });
                    }
                    index.insert(next.clone(), id);
                    configs.push(next);
                    queue.push_back(id);
                    id
                }
            };
            row.push(target);
        }
        delta.push(row);
    }

    let lambda: Vec<OutputValue> = configs
        .iter()
        .map(|c| function.config_output(c))
        .collect::<Result<_>>()?;
    let labels: Vec<String> = configs.iter().map(|c| c.to_string()).collect();
    MooreMachine::new(alphabet, 0, delta, lambda)?.with_labels(labels)
}

/// Builds the routed product of component machines: states are the
/// reachable tuples of component states, outputs are the tuples of
/// component outputs, and one global event advances each component along
/// its routed local sequence, all read against the same pre-step output
/// tuple.
pub fn product(
    machines: &[MooreMachine],
    routing: &RoutingSpec,
    max_states: usize,
) -> Result<MooreMachine> {
    if machines.len() != routing.component_count() {
        return Err(Error::ComponentCountMismatch {
            expected: routing.component_count(),
            actual: machines.len(),
        });
    }
    for (i, machine) in machines.iter().enumerate() {
        if *machine.alphabet() != *routing.local_alphabet(i) {
            return Err(Error::AlphabetMismatch {
                expected: routing.local_alphabet(i).to_string(),
                actual: machine.alphabet().to_string(),
            });
        }
    }
    let alphabet = routing.global_alphabet().clone();
    let initial: Vec<usize> = machines.iter().map(|m| m.start_state()).collect();

    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    if max_states == 0 {
        return Err(Error::BoundExceeded { limit: max_states });
    }
    index.insert(initial.clone(), 0);
    tuples.push(initial);
    queue.push_back(0);

    while let Some(state) = queue.pop_front() {
        let tuple = tuples[state].clone();
        let outputs: Vec<OutputValue> = machines
            .iter()
            .zip(&tuple)
            .map(|(m, &s)| m.output(s).clone())
            .collect();
        let mut row = Vec::with_capacity(alphabet.len());
        for event in alphabet.ids() {
            let symbol = alphabet.symbol(event);
            let mut next = Vec::with_capacity(machines.len());
            for (i, (machine, &component_state)) in machines.iter().zip(&tuple).enumerate() {
                let local = routing.route(i, symbol, &outputs)?;
                let (reached, _) = machine.run_from(component_state, &local)?;
                next.push(reached);
            }
            let target = match index.get(&next) {
                Some(&existing) => existing,
                None => {
                    let id = tuples.len();
                    if id >= max_states {
                        return Err(Error::BoundExceeded { limit: max_states });
                    }
                    index.insert(next.clone(), id);
                    tuples.push(next);
                    queue.push_back(id);
                    id
                }
            };
            row.push(target);
        }
        delta.push(row);
    }

    let lambda: Vec<OutputValue> = tuples
        .iter()
        .map(|tuple| {
            OutputValue::Tuple(
                machines
                    .iter()
                    .zip(tuple)
                    .map(|(m, &s)| m.output(s).clone())
                    .collect(),
            )
        })
        .collect();
    let labels: Vec<String> = tuples
        .iter()
        .map(|tuple| {
            let mut label = String::from("(");
            for (i, s) in tuple.iter().enumerate() {
                if i > 0 {
                    label.push(',');
                }
                let _ = write!(label, "{s}");
            }
            label.push(')');
            label
        })
        .collect();
    MooreMachine::new(alphabet, 0, delta, lambda)?.with_labels(labels)
}

/// Decides whether two machines produce the same output on every
/// sequence, by synchronized breadth-first search over reachable state
/// pairs. On disagreement the witness is the shortlex-minimal separating
/// sequence; the first machine's output is reported as `expected`.
pub fn check_equivalent(left: &MooreMachine, right: &MooreMachine) -> Result<Verdict> {
    if *left.alphabet() != *right.alphabet() {
        return Err(Error::AlphabetMismatch {
            expected: left.alphabet().to_string(),
            actual: right.alphabet().to_string(),
        });
    }
    let alphabet = left.alphabet();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut parents: Vec<Option<(usize, u32)>> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    let start = (left.start_state(), right.start_state());
    index.insert(start, 0);
    pairs.push(start);
    parents.push(None);
    queue.push_back(0);
    if let Some(verdict) = pair_disagrees(left, right, 0, &pairs, &parents, alphabet)? {
        return Ok(verdict);
    }

    while let Some(at) = queue.pop_front() {
        let (l, r) = pairs[at];
        for event in alphabet.ids() {
            let next = (left.successor(l, event), right.successor(r, event));
            if index.contains_key(&next) {
                continue;
            }
            let id = pairs.len();
            index.insert(next, id);
            pairs.push(next);
            parents.push(Some((at, event)));
            if let Some(verdict) = pair_disagrees(left, right, id, &pairs, &parents, alphabet)? {
                return Ok(verdict);
            }
            queue.push_back(id);
        }
    }
    Ok(Verdict::Pass)
}

fn pair_disagrees(
    left: &MooreMachine,
    right: &MooreMachine,
    at: usize,
    pairs: &[(usize, usize)],
    parents: &[Option<(usize, u32)>],
    alphabet: &Alphabet,
) -> Result<Option<Verdict>> {
    let (l, r) = pairs[at];
    if left.output(l) == right.output(r) {
        return Ok(None);
    }
    let witness = rebuild_path(parents, at, alphabet);
    Ok(Some(Verdict::Fail {
        witness,
        expected: left.output(l).clone(),
        actual: right.output(r).clone(),
    }))
}

fn rebuild_path(parents: &[Option<(usize, u32)>], mut at: usize, alphabet: &Alphabet) -> EventSequence {
    let mut ids = Vec::new();
    while let Some((parent, event)) = parents[at] {
        ids.push(event);
        at = parent;
    }
    ids.reverse();
    EventSequence::from_ids(alphabet, ids)
}

/// Checks that `machine` implements `function`: equal outputs on every
/// sequence. When the function compiles within the default state bound
/// the check is exact and `depth` is ignored; otherwise all sequences of
/// length at most `depth` are covered by a synchronized search over
/// (machine state, function configuration) pairs, closing branches whose
/// pair has been seen before.
pub fn check_implements(
    machine: &MooreMachine,
    function: &SequenceFunction,
    depth: usize,
) -> Result<Verdict> {
    if *machine.alphabet() != *function.alphabet() {
        return Err(Error::AlphabetMismatch {
            expected: machine.alphabet().to_string(),
            actual: function.alphabet().to_string(),
        });
    }
    if !function.has_unbounded_domain() {
        match compile(function, DEFAULT_MAX_STATES) {
            Ok(compiled) => return check_equivalent(&compiled, machine),
            Err(Error::BoundExceeded { .. }) => {}
            Err(other) => return Err(other),
        }
    }
    bounded_implements(machine, function, depth)
}

fn bounded_implements(
    machine: &MooreMachine,
    function: &SequenceFunction,
    depth: usize,
) -> Result<Verdict> {
    let alphabet = machine.alphabet();
    let mut seen: HashSet<(usize, Config)> = HashSet::new();
    let mut parents: Vec<Option<(usize, u32)>> = Vec::new();
    let mut nodes: Vec<(usize, Config, usize)> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    let start = (machine.start_state(), function.initial_config());
    seen.insert(start.clone());
    nodes.push((start.0, start.1, 0));
    parents.push(None);
    queue.push_back(0);

    let check = |at: usize,
                 nodes: &[(usize, Config, usize)],
                 parents: &[Option<(usize, u32)>]|
     -> Result<Option<Verdict>> {
        let (state, config, _) = &nodes[at];
        let expected = function.config_output(config)?;
        let actual = machine.output(*state);
        if expected == *actual {
            return Ok(None);
        }
        Ok(Some(Verdict::Fail {
            witness: rebuild_path(parents, at, alphabet),
            expected,
            actual: actual.clone(),
        }))
    };

    if let Some(verdict) = check(0, &nodes, &parents)? {
        return Ok(verdict);
    }
    while let Some(at) = queue.pop_front() {
        let (state, config, length) = nodes[at].clone();
        if length >= depth {
            continue;
        }
        for event in alphabet.ids() {
            let next = (
                machine.successor(state, event),
                function.step_config(&config, event)?,
            );
            if !seen.insert(next.clone()) {
                continue;
            }
            let id = nodes.len();
            nodes.push((next.0, next.1, length + 1));
            parents.push(Some((at, event)));
            if let Some(verdict) = check(id, &nodes, &parents)? {
                return Ok(verdict);
            }
            queue.push_back(id);
        }
    }
    Ok(Verdict::Pass)
}

/// Searches the reachable part of the machine for a state that some
/// non-empty sequence returns to. The witness starts at the first such
/// state in breadth-first discovery order and follows its shortest cycle,
/// ties broken by alphabet order. A total finite machine always has one;
/// `Pass` is only possible for machines whose transitions leave the
/// explored region, which explicit machines here never do.
pub fn find_cycle(machine: &MooreMachine) -> Verdict {
    let order = machine.bfs_order();
    let reachable: HashSet<usize> = order.iter().copied().collect();
    let component = strongly_connected_components(machine, &reachable);

    let mut component_sizes: HashMap<usize, usize> = HashMap::new();
    for state in &order {
        *component_sizes.entry(component[state]).or_insert(0) += 1;
    }

    for &state in &order {
        let in_nontrivial_scc = component_sizes[&component[&state]] > 1;
        let has_self_loop = machine
            .alphabet()
            .ids()
            .any(|event| machine.successor(state, event) == state);
        if in_nontrivial_scc || has_self_loop {
            return shortest_cycle_from(machine, state);
        }
    }
    Verdict::Pass
}

fn shortest_cycle_from(machine: &MooreMachine, origin: usize) -> Verdict {
    let alphabet = machine.alphabet();
    // Breadth-first search for the shortest non-empty path back to origin,
    // seeded with the origin's successors in alphabet order.
    let mut parents: HashMap<usize, (usize, u32)> = HashMap::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for event in alphabet.ids() {
        let next = machine.successor(origin, event);
        if next == origin {
            return Verdict::CycleWitness {
                states: vec![origin],
                events: EventSequence::from_ids(alphabet, vec![event]),
            };
        }
        if !parents.contains_key(&next) {
            parents.insert(next, (origin, event));
            queue.push_back(next);
        }
    }
    while let Some(state) = queue.pop_front() {
        for event in alphabet.ids() {
            let next = machine.successor(state, event);
            if next == origin {
                // Rebuild the path origin -> ... -> state, then close it.
                let mut ids = vec![event];
                let mut states = vec![state];
                let mut at = state;
                while at != origin {
                    let (parent, via) = parents[&at];
                    ids.push(via);
                    states.push(parent);
                    at = parent;
                }
                ids.reverse();
                states.reverse();
                return Verdict::CycleWitness {
                    states,
                    events: EventSequence::from_ids(alphabet, ids),
                };
            }
            if !parents.contains_key(&next) {
                parents.insert(next, (state, event));
                queue.push_back(next);
            }
        }
    }
    Verdict::Pass
}

/// Iterative Tarjan strongly-connected components over the reachable
/// states; returns the component id of each reachable state.
fn strongly_connected_components(
    machine: &MooreMachine,
    reachable: &HashSet<usize>,
) -> HashMap<usize, usize> {
    let mut index_counter = 0usize;
    let mut component_counter = 0usize;
    let mut indices: HashMap<usize, usize> = HashMap::new();
    let mut lowlink: HashMap<usize, usize> = HashMap::new();
    let mut on_stack: HashSet<usize> = HashSet::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut component: HashMap<usize, usize> = HashMap::new();

    let events: Vec<u32> = machine.alphabet().ids().collect();
    let mut order: Vec<usize> = reachable.iter().copied().collect();
    order.sort_unstable();

    for &root in &order {
        if indices.contains_key(&root) {
            continue;
        }
        // Frame: (state, next edge index to explore).
        let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
        indices.insert(root, index_counter);
        lowlink.insert(root, index_counter);
        index_counter += 1;
        stack.push(root);
        on_stack.insert(root);

        loop {
            let Some(&(state, edge)) = frames.last() else {
                break;
            };
            if edge < events.len() {
                frames.last_mut().expect("frame exists").1 += 1;
                let next = machine.successor(state, events[edge]);
                if !indices.contains_key(&next) {
                    indices.insert(next, index_counter);
                    lowlink.insert(next, index_counter);
                    index_counter += 1;
                    stack.push(next);
                    on_stack.insert(next);
                    frames.push((next, 0));
                } else if on_stack.contains(&next) {
                    let low = lowlink[&state].min(indices[&next]);
                    lowlink.insert(state, low);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    let low = lowlink[&parent].min(lowlink[&state]);
                    lowlink.insert(parent, low);
                }
                if lowlink[&state] == indices[&state] {
                    loop {
                        let member = stack.pop().expect("stack holds the component");
                        on_stack.remove(&member);
                        component.insert(member, component_counter);
                        if member == state {
                            break;
                        }
                    }
                    component_counter += 1;
                }
            }
        }
    }
    component
}
