//! The model document format: one JSON document declaring alphabets,
//! sequence functions, machines, and predicates by name.
//!
//! Top-level keys:
//!
//! * `"alphabets"`: name -> list of event strings.
//! * `"functions"`: name -> a definition tagged by `"kind"`:
//!   `counter` (modulus int or `"unbounded"`, alphabet name), `primrec`
//!   (alphabet, domain list, init, step table event -> value -> value),
//!   `mapped` (inner name, map table value -> value), `parallel` (part
//!   names), `composite` (component names plus routing).
//! * `"machines"`: name -> an explicit machine (alphabet, states, start,
//!   delta, lambda, optional outputs) or a derived one: kind `compile`
//!   (fn name, optional maxStates) or kind `product` (machine names plus
//!   routing, optional maxStates).
//! * `"predicates"`: name -> a guard expression tree over output slots,
//!   extended with a counting atom.
//!
//! Values are JSON integers (numbers), symbols (strings), or tuples
//! (arrays). Where a value appears as an object key — step tables, map
//! tables, lambda — a key that parses as an integer means the integer
//! value, so tuple-valued keys are not expressible. Slot and component
//! indices are 1-based in the document and in reports.
//!
//! Every reference must resolve and definitions must be acyclic; any
//! violation is reported as a diagnostic naming the JSON path of the
//! first error in document order.

use indexmap::IndexMap;
use seqfn::analysis::Predicate;
use seqfn::{
    compile, product, Alphabet, CmpOp, Composite, Error as CoreError, Guard, GuardedRule,
    MooreMachine, OutputMap, PrimRecDef, RoutingSpec, SequenceFunction, DEFAULT_MAX_STATES,
};
use serde_json::{Map, Value};
use thiserror::Error;

/// A diagnostic naming the JSON path of the first error.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct DocError {
    pub path: String,
    pub message: String,
}

impl DocError {
    fn new(path: impl Into<String>, message: impl ToString) -> Self {
        DocError {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

type DocResult<T> = Result<T, DocError>;

/// Every named object of one parsed, fully validated document.
#[derive(Debug, Default)]
pub struct Registry {
    pub alphabets: IndexMap<String, Alphabet>,
    pub functions: IndexMap<String, SequenceFunction>,
    pub machines: IndexMap<String, MooreMachine>,
    pub predicates: IndexMap<String, Predicate>,
}

/// Parses and validates a whole document.
pub fn parse_document(text: &str) -> DocResult<Registry> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| DocError::new("document", format!("invalid JSON: {e}")))?;
    let root = as_object(&root, "document")?;
    for key in root.keys() {
        if !matches!(
            key.as_str(),
            "alphabets" | "functions" | "machines" | "predicates"
        ) {
            return Err(DocError::new(key, "unknown top-level key"));
        }
    }

    let mut registry = Registry::default();

    if let Some(section) = root.get("alphabets") {
        let section = as_object(section, "alphabets")?;
        for (name, value) in section {
            let path = format!("alphabets.{name}");
            let events = as_array(value, &path)?
                .iter()
                .enumerate()
                .map(|(i, v)| as_string(v, &format!("{path}.{i}")))
                .collect::<DocResult<Vec<_>>>()?;
            let alphabet = Alphabet::new(events).map_err(|e| DocError::new(&path, e))?;
            registry.alphabets.insert(name.clone(), alphabet);
        }
    }

    if let Some(section) = root.get("functions") {
        let section = as_object(section, "functions")?;
        let mut visiting = Vec::new();
        for name in section.keys() {
            resolve_function(name, section, &mut registry, &mut visiting)?;
        }
    }

    if let Some(section) = root.get("machines") {
        let section = as_object(section, "machines")?;
        let mut visiting = Vec::new();
        for name in section.keys() {
            resolve_machine(name, section, &mut registry, &mut visiting)?;
        }
    }

    if let Some(section) = root.get("predicates") {
        let section = as_object(section, "predicates")?;
        for (name, value) in section {
            let path = format!("predicates.{name}");
            let predicate = parse_predicate(value, &path)?;
            registry.predicates.insert(name.clone(), predicate);
        }
    }

    Ok(registry)
}

fn resolve_function(
    name: &str,
    section: &Map<String, Value>,
    registry: &mut Registry,
    visiting: &mut Vec<String>,
) -> DocResult<SequenceFunction> {
    if let Some(found) = registry.functions.get(name) {
        return Ok(found.clone());
    }
    let path = format!("functions.{name}");
    if visiting.iter().any(|n| n == name) {
        return Err(DocError::new(
            &path,
            format!("definition cycle through {}", visiting.join(" -> ")),
        ));
    }
    let Some(def) = section.get(name) else {
        return Err(DocError::new(&path, "unresolved function name"));
    };
    visiting.push(name.to_string());
    let function = parse_function(def, &path, section, registry, visiting)?;
    visiting.pop();
    registry
        .functions
        .insert(name.to_string(), function.clone());
    Ok(function)
}

fn parse_function(
    def: &Value,
    path: &str,
    section: &Map<String, Value>,
    registry: &mut Registry,
    visiting: &mut Vec<String>,
) -> DocResult<SequenceFunction> {
    let object = as_object(def, path)?;
    let kind = as_string(required(object, "kind", path)?, &format!("{path}.kind"))?;
    match kind.as_str() {
        "counter" => {
            expect_only(object, &["kind", "modulus", "alphabet"], path)?;
            let alphabet = lookup_alphabet(object, path, registry)?;
            let modulus = required(object, "modulus", path)?;
            match modulus {
                Value::String(s) if s == "unbounded" => {
                    SequenceFunction::unbounded_counter_in(alphabet)
                        .map_err(|e| DocError::new(path, e))
                }
                Value::Number(_) => {
                    let k = as_int(modulus, &format!("{path}.modulus"))?;
                    SequenceFunction::counter_in(k, alphabet).map_err(|e| DocError::new(path, e))
                }
                _ => Err(DocError::new(
                    format!("{path}.modulus"),
                    "expected an integer or \"unbounded\"",
                )),
            }
        }
        "primrec" => {
            expect_only(object, &["kind", "alphabet", "domain", "init", "step"], path)?;
            let alphabet = lookup_alphabet(object, path, registry)?;
            let domain_path = format!("{path}.domain");
            let domain = as_array(required(object, "domain", path)?, &domain_path)?
                .iter()
                .enumerate()
                .map(|(i, v)| parse_value(v, &format!("{domain_path}.{i}")))
                .collect::<DocResult<Vec<_>>>()?;
            let init = parse_value(required(object, "init", path)?, &format!("{path}.init"))?;
            let step_path = format!("{path}.step");
            let step_object = as_object(required(object, "step", path)?, &step_path)?;
            let mut step = Vec::new();
            for (event, by_value) in step_object {
                let event_path = format!("{step_path}.{event}");
                let by_value = as_object(by_value, &event_path)?;
                for (key, next) in by_value {
                    let entry_path = format!("{event_path}.{key}");
                    let value = parse_key(key);
                    let next = parse_value(next, &entry_path)?;
                    step.push(((event.clone(), value), next));
                }
            }
            PrimRecDef::new(alphabet, domain, init, step)
                .map(SequenceFunction::from)
                .map_err(|e| match &e {
                    CoreError::StepIncomplete { event, value } => DocError::new(
                        format!("{step_path}.{event}.{value}"),
                        "step table is missing this entry",
                    ),
                    _ => DocError::new(path, e),
                })
        }
        "mapped" => {
            expect_only(object, &["kind", "inner", "map"], path)?;
            let inner_name =
                as_string(required(object, "inner", path)?, &format!("{path}.inner"))?;
            let inner = resolve_function(&inner_name, section, registry, visiting)?;
            let map_path = format!("{path}.map");
            let map_object = as_object(required(object, "map", path)?, &map_path)?;
            let mut pairs = Vec::new();
            for (key, to) in map_object {
                let to = parse_value(to, &format!("{map_path}.{key}"))?;
                pairs.push((parse_key(key), to));
            }
            SequenceFunction::mapped(inner, OutputMap::table(pairs))
                .map_err(|e| DocError::new(path, e))
        }
        "parallel" => {
            expect_only(object, &["kind", "parts"], path)?;
            let parts_path = format!("{path}.parts");
            let names = as_array(required(object, "parts", path)?, &parts_path)?;
            let mut parts = Vec::new();
            for (i, part) in names.iter().enumerate() {
                let part = as_string(part, &format!("{parts_path}.{i}"))?;
                parts.push(resolve_function(&part, section, registry, visiting)?);
            }
            SequenceFunction::parallel(parts).map_err(|e| DocError::new(path, e))
        }
        "composite" => {
            expect_only(object, &["kind", "components", "routing"], path)?;
            let comp_path = format!("{path}.components");
            let names = as_array(required(object, "components", path)?, &comp_path)?;
            let mut components = Vec::new();
            for (i, comp) in names.iter().enumerate() {
                let comp = as_string(comp, &format!("{comp_path}.{i}"))?;
                components.push(resolve_function(&comp, section, registry, visiting)?);
            }
            let locals: Vec<Alphabet> =
                components.iter().map(|c| c.alphabet().clone()).collect();
            let routing = parse_routing(
                required(object, "routing", path)?,
                &format!("{path}.routing"),
                locals,
                registry,
            )?;
            Composite::new(components, routing)
                .map(SequenceFunction::from)
                .map_err(|e| DocError::new(path, e))
        }
        other => Err(DocError::new(
            format!("{path}.kind"),
            format!("unknown function kind {other:?}"),
        )),
    }
}

fn parse_routing(
    def: &Value,
    path: &str,
    locals: Vec<Alphabet>,
    registry: &Registry,
) -> DocResult<RoutingSpec> {
    let object = as_object(def, path)?;
    let global_name =
        as_string(required(object, "global", path)?, &format!("{path}.global"))?;
    let global = registry
        .alphabets
        .get(&global_name)
        .cloned()
        .ok_or_else(|| {
            DocError::new(
                format!("{path}.global"),
                format!("unresolved alphabet name {global_name:?}"),
            )
        })?;
    let rules_path = format!("{path}.rules");
    let per_component = as_array(required(object, "rules", path)?, &rules_path)?;
    let mut rules = Vec::new();
    for (i, component_rules) in per_component.iter().enumerate() {
        let component_path = format!("{rules_path}.{i}");
        let list = as_array(component_rules, &component_path)?;
        let mut parsed = Vec::new();
        for (j, rule) in list.iter().enumerate() {
            let rule_path = format!("{component_path}.{j}");
            let rule = as_object(rule, &rule_path)?;
            for key in rule.keys() {
                if key != "when" && key != "emit" {
                    return Err(DocError::new(
                        format!("{rule_path}.{key}"),
                        "unknown rule key",
                    ));
                }
            }
            let when = match rule.get("when") {
                None => Guard::and([]),
                Some(guard) => parse_guard(guard, &format!("{rule_path}.when"))?,
            };
            let emit = match rule.get("emit") {
                None => Vec::new(),
                Some(events) => as_array(events, &format!("{rule_path}.emit"))?
                    .iter()
                    .enumerate()
                    .map(|(k, v)| as_string(v, &format!("{rule_path}.emit.{k}")))
                    .collect::<DocResult<Vec<_>>>()?,
            };
            parsed.push(GuardedRule::new(when, emit));
        }
        rules.push(parsed);
    }
    RoutingSpec::new(global, locals, rules).map_err(|e| DocError::new(path, e))
}

fn parse_guard(def: &Value, path: &str) -> DocResult<Guard> {
    match def {
        Value::Bool(true) => Ok(Guard::and([])),
        Value::Bool(false) => Ok(Guard::or([])),
        Value::Object(object) => {
            if let Some(list) = object.get("and") {
                expect_only(object, &["and"], path)?;
                let guards = parse_guard_list(list, &format!("{path}.and"))?;
                return Ok(Guard::and(guards));
            }
            if let Some(list) = object.get("or") {
                expect_only(object, &["or"], path)?;
                let guards = parse_guard_list(list, &format!("{path}.or"))?;
                return Ok(Guard::or(guards));
            }
            if let Some(inner) = object.get("not") {
                expect_only(object, &["not"], path)?;
                return Ok(Guard::not(parse_guard(inner, &format!("{path}.not"))?));
            }
            let op = parse_cmp(
                &as_string(required(object, "op", path)?, &format!("{path}.op"))?,
                &format!("{path}.op"),
            )?;
            expect_only(object, &["op", "lhs", "rhs"], path)?;
            let lhs = as_object(required(object, "lhs", path)?, &format!("{path}.lhs"))?;
            let rhs = required(object, "rhs", path)?;
            if lhs.contains_key("event") {
                expect_only(lhs, &["event"], &format!("{path}.lhs"))?;
                let symbol = as_string(rhs, &format!("{path}.rhs"))?;
                return match op {
                    CmpOp::Eq => Ok(Guard::Event {
                        symbol,
                        negated: false,
                    }),
                    CmpOp::Ne => Ok(Guard::Event {
                        symbol,
                        negated: true,
                    }),
                    _ => Err(DocError::new(
                        format!("{path}.op"),
                        "event comparisons support only eq and ne",
                    )),
                };
            }
            let slot = parse_slot_index(lhs, path)?;
            let proj = match lhs.get("proj") {
                None => None,
                Some(p) => Some(as_index(p, &format!("{path}.lhs.proj"))?),
            };
            expect_only(lhs, &["slot", "proj"], &format!("{path}.lhs"))?;
            let value = parse_value(rhs, &format!("{path}.rhs"))?;
            Ok(Guard::Slot {
                slot,
                proj,
                op,
                value,
            })
        }
        _ => Err(DocError::new(path, "expected a guard object or boolean")),
    }
}

fn parse_guard_list(def: &Value, path: &str) -> DocResult<Vec<Guard>> {
    as_array(def, path)?
        .iter()
        .enumerate()
        .map(|(i, g)| parse_guard(g, &format!("{path}.{i}")))
        .collect()
}

fn parse_predicate(def: &Value, path: &str) -> DocResult<Predicate> {
    match def {
        Value::Object(object) => {
            if let Some(list) = object.get("and") {
                expect_only(object, &["and"], path)?;
                let branch_path = format!("{path}.and");
                let ps = as_array(list, &branch_path)?
                    .iter()
                    .enumerate()
                    .map(|(i, p)| parse_predicate(p, &format!("{branch_path}.{i}")))
                    .collect::<DocResult<Vec<_>>>()?;
                return Ok(Predicate::And(ps));
            }
            if let Some(list) = object.get("or") {
                expect_only(object, &["or"], path)?;
                let branch_path = format!("{path}.or");
                let ps = as_array(list, &branch_path)?
                    .iter()
                    .enumerate()
                    .map(|(i, p)| parse_predicate(p, &format!("{branch_path}.{i}")))
                    .collect::<DocResult<Vec<_>>>()?;
                return Ok(Predicate::Or(ps));
            }
            if let Some(inner) = object.get("not") {
                expect_only(object, &["not"], path)?;
                return Ok(Predicate::Not(Box::new(parse_predicate(
                    inner,
                    &format!("{path}.not"),
                )?)));
            }
            if let Some(count) = object.get("count") {
                expect_only(object, &["count", "cmp", "rhs"], path)?;
                let count_path = format!("{path}.count");
                let count = as_object(count, &count_path)?;
                expect_only(count, &["slots", "in"], &count_path)?;
                let slots_path = format!("{count_path}.slots");
                let slots = as_array(required(count, "slots", &count_path)?, &slots_path)?
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let index = as_index(v, &format!("{slots_path}.{i}"))?;
                        to_zero_based(index, &format!("{slots_path}.{i}"))
                    })
                    .collect::<DocResult<Vec<_>>>()?;
                let in_path = format!("{count_path}.in");
                let values = as_array(required(count, "in", &count_path)?, &in_path)?
                    .iter()
                    .enumerate()
                    .map(|(i, v)| parse_value(v, &format!("{in_path}.{i}")))
                    .collect::<DocResult<Vec<_>>>()?;
                let op = parse_count_cmp(
                    &as_string(required(object, "cmp", path)?, &format!("{path}.cmp"))?,
                    &format!("{path}.cmp"),
                )?;
                let bound = as_int(required(object, "rhs", path)?, &format!("{path}.rhs"))?;
                return Ok(Predicate::count(slots, values, op, bound));
            }
            // A plain slot comparison atom.
            let op = parse_cmp(
                &as_string(required(object, "op", path)?, &format!("{path}.op"))?,
                &format!("{path}.op"),
            )?;
            expect_only(object, &["op", "lhs", "rhs"], path)?;
            let lhs = as_object(required(object, "lhs", path)?, &format!("{path}.lhs"))?;
            if lhs.contains_key("event") {
                return Err(DocError::new(
                    format!("{path}.lhs"),
                    "predicates range over outputs, not events",
                ));
            }
            let slot = parse_slot_index(lhs, path)?;
            let proj = match lhs.get("proj") {
                None => None,
                Some(p) => Some(as_index(p, &format!("{path}.lhs.proj"))?),
            };
            expect_only(lhs, &["slot", "proj"], &format!("{path}.lhs"))?;
            let value = parse_value(required(object, "rhs", path)?, &format!("{path}.rhs"))?;
            Ok(Predicate::Slot {
                slot,
                proj,
                op,
                value,
            })
        }
        _ => Err(DocError::new(path, "expected a predicate object")),
    }
}

fn resolve_machine(
    name: &str,
    section: &Map<String, Value>,
    registry: &mut Registry,
    visiting: &mut Vec<String>,
) -> DocResult<MooreMachine> {
    if let Some(found) = registry.machines.get(name) {
        return Ok(found.clone());
    }
    let path = format!("machines.{name}");
    if visiting.iter().any(|n| n == name) {
        return Err(DocError::new(
            &path,
            format!("definition cycle through {}", visiting.join(" -> ")),
        ));
    }
    let Some(def) = section.get(name) else {
        return Err(DocError::new(&path, "unresolved machine name"));
    };
    visiting.push(name.to_string());
    let machine = parse_machine(def, &path, section, registry, visiting)?;
    visiting.pop();
    registry.machines.insert(name.to_string(), machine.clone());
    Ok(machine)
}

fn parse_machine(
    def: &Value,
    path: &str,
    section: &Map<String, Value>,
    registry: &mut Registry,
    visiting: &mut Vec<String>,
) -> DocResult<MooreMachine> {
    let object = as_object(def, path)?;
    match object.get("kind").map(|k| as_string(k, &format!("{path}.kind"))) {
        Some(kind) => match kind?.as_str() {
            "compile" => {
                expect_only(object, &["kind", "fn", "maxStates"], path)?;
                let fn_name = as_string(required(object, "fn", path)?, &format!("{path}.fn"))?;
                let function = registry.functions.get(&fn_name).cloned().ok_or_else(|| {
                    DocError::new(
                        format!("{path}.fn"),
                        format!("unresolved function name {fn_name:?}"),
                    )
                })?;
                let max_states = optional_max_states(object, path)?;
                compile(&function, max_states).map_err(|e| DocError::new(path, e))
            }
            "product" => {
                expect_only(object, &["kind", "machines", "routing", "maxStates"], path)?;
                let names_path = format!("{path}.machines");
                let names = as_array(required(object, "machines", path)?, &names_path)?;
                let mut machines = Vec::new();
                for (i, machine_name) in names.iter().enumerate() {
                    let machine_name =
                        as_string(machine_name, &format!("{names_path}.{i}"))?;
                    machines.push(resolve_machine(
                        &machine_name,
                        section,
                        registry,
                        visiting,
                    )?);
                }
                let locals: Vec<Alphabet> =
                    machines.iter().map(|m| m.alphabet().clone()).collect();
                let routing = parse_routing(
                    required(object, "routing", path)?,
                    &format!("{path}.routing"),
                    locals,
                    registry,
                )?;
                let max_states = optional_max_states(object, path)?;
                product(&machines, &routing, max_states).map_err(|e| DocError::new(path, e))
            }
            other => Err(DocError::new(
                format!("{path}.kind"),
                format!("unknown machine kind {other:?}"),
            )),
        },
        None => parse_explicit_machine(object, path, registry),
    }
}

fn parse_explicit_machine(
    object: &Map<String, Value>,
    path: &str,
    registry: &Registry,
) -> DocResult<MooreMachine> {
    expect_only(
        object,
        &["alphabet", "states", "start", "delta", "lambda", "outputs"],
        path,
    )?;
    let alphabet = lookup_alphabet(object, path, registry)?;
    let states_path = format!("{path}.states");
    let states = as_array(required(object, "states", path)?, &states_path)?
        .iter()
        .enumerate()
        .map(|(i, v)| as_string(v, &format!("{states_path}.{i}")))
        .collect::<DocResult<Vec<_>>>()?;
    for (i, state) in states.iter().enumerate() {
        if states[..i].contains(state) {
            return Err(DocError::new(
                format!("{states_path}.{i}"),
                format!("duplicate state {state:?}"),
            ));
        }
    }
    let index_of = |state: &str, at: &str| -> DocResult<usize> {
        states
            .iter()
            .position(|s| s == state)
            .ok_or_else(|| DocError::new(at, format!("unknown state {state:?}")))
    };

    let start_path = format!("{path}.start");
    let start = as_string(required(object, "start", path)?, &start_path)?;
    let start = index_of(&start, &start_path)?;

    let delta_path = format!("{path}.delta");
    let delta_object = as_object(required(object, "delta", path)?, &delta_path)?;
    let mut delta = vec![vec![usize::MAX; alphabet.len()]; states.len()];
    for (state, by_event) in delta_object {
        let state_path = format!("{delta_path}.{state}");
        let from = index_of(state, &state_path)?;
        let by_event = as_object(by_event, &state_path)?;
        for (event, target) in by_event {
            let entry_path = format!("{state_path}.{event}");
            let event_id = alphabet.index_of(event).ok_or_else(|| {
                DocError::new(&entry_path, format!("unknown event {event:?}"))
            })?;
            let target = as_string(target, &entry_path)?;
            delta[from][event_id as usize] = index_of(&target, &entry_path)?;
        }
    }
    for (i, state) in states.iter().enumerate() {
        for event in alphabet.events() {
            let id = alphabet.index_of(event).unwrap() as usize;
            if delta[i][id] == usize::MAX {
                return Err(DocError::new(
                    format!("{delta_path}.{state}.{event}"),
                    "transition table is missing this entry",
                ));
            }
        }
    }

    let lambda_path = format!("{path}.lambda");
    let lambda_object = as_object(required(object, "lambda", path)?, &lambda_path)?;
    let mut lambda = vec![None; states.len()];
    for (state, value) in lambda_object {
        let state_path = format!("{lambda_path}.{state}");
        let at = index_of(state, &state_path)?;
        lambda[at] = Some(parse_value(value, &state_path)?);
    }
    let lambda = lambda
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| {
                DocError::new(
                    format!("{lambda_path}.{}", states[i]),
                    "output map is missing this state",
                )
            })
        })
        .collect::<DocResult<Vec<_>>>()?;

    let machine = MooreMachine::new(alphabet, start, delta, lambda)
        .map_err(|e| DocError::new(path, e))?
        .with_labels(states)
        .map_err(|e| DocError::new(path, e))?;
    match object.get("outputs") {
        None => Ok(machine),
        Some(outputs) => {
            let outputs_path = format!("{path}.outputs");
            let output_set = as_array(outputs, &outputs_path)?
                .iter()
                .enumerate()
                .map(|(i, v)| parse_value(v, &format!("{outputs_path}.{i}")))
                .collect::<DocResult<Vec<_>>>()?;
            machine
                .with_output_set(output_set)
                .map_err(|e| DocError::new(outputs_path, e))
        }
    }
}

// ---------------------------------------------------------------------
// Serialization back to the document format.

/// Accumulates named objects into one document value. Nested anonymous
/// definitions get derived names (`name__inner`, `name__p0`, ...).
#[derive(Debug, Default)]
pub struct DocumentBuilder {
    alphabets: IndexMap<String, Alphabet>,
    functions: IndexMap<String, Value>,
    machines: IndexMap<String, Value>,
    predicates: IndexMap<String, Value>,
}

impl DocumentBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn alphabet_name(&mut self, alphabet: &Alphabet) -> String {
        for (name, existing) in &self.alphabets {
            if existing == alphabet {
                return name.clone();
            }
        }
        let name = format!("alphabet{}", self.alphabets.len());
        self.alphabets.insert(name.clone(), alphabet.clone());
        name
    }

    pub fn add_function(&mut self, name: &str, function: &SequenceFunction) -> DocResult<()> {
        let def = self.function_value(name, function)?;
        self.functions.insert(name.to_string(), def);
        Ok(())
    }

    fn function_value(&mut self, name: &str, function: &SequenceFunction) -> DocResult<Value> {
        match function {
            SequenceFunction::PrimRec(def) => {
                let alphabet = self.alphabet_name(def.alphabet());
                if let Some(modulus) = def.as_counter() {
                    let modulus = match modulus {
                        Some(k) => Value::from(k),
                        None => Value::from("unbounded"),
                    };
                    return Ok(serde_json::json!({
                        "kind": "counter",
                        "modulus": modulus,
                        "alphabet": alphabet,
                    }));
                }
                let seqfn::OutputDomain::Explicit(domain) = def.domain() else {
                    return Err(DocError::new(
                        name,
                        "unbounded table definitions are not expressible",
                    ));
                };
                let mut step = Map::new();
                for event in def.alphabet().events() {
                    let mut by_value = Map::new();
                    for value in domain {
                        let next = def
                            .apply_step(event, value)
                            .map_err(|e| DocError::new(name, e))?;
                        by_value.insert(value_key(value, name)?, value_to_json(&next));
                    }
                    step.insert(event.clone(), Value::Object(by_value));
                }
                Ok(serde_json::json!({
                    "kind": "primrec",
                    "alphabet": alphabet,
                    "domain": domain.iter().map(value_to_json).collect::<Vec<_>>(),
                    "init": value_to_json(def.init()),
                    "step": step,
                }))
            }
            SequenceFunction::Mapped(def) => {
                let inner_name = format!("{name}__inner");
                let inner_def = self.function_value(&inner_name, def.inner())?;
                self.functions.insert(inner_name.clone(), inner_def);
                let OutputMap::Table(pairs) = def.map() else {
                    return Err(DocError::new(
                        name,
                        "rule-form output maps are not expressible; use a table",
                    ));
                };
                let mut map = Map::new();
                for (from, to) in pairs {
                    map.insert(value_key(from, name)?, value_to_json(to));
                }
                Ok(serde_json::json!({
                    "kind": "mapped",
                    "inner": inner_name,
                    "map": map,
                }))
            }
            SequenceFunction::Parallel(def) => {
                let mut parts = Vec::new();
                for (i, part) in def.parts().iter().enumerate() {
                    let part_name = format!("{name}__p{i}");
                    let part_def = self.function_value(&part_name, part)?;
                    self.functions.insert(part_name.clone(), part_def);
                    parts.push(Value::from(part_name));
                }
                Ok(serde_json::json!({ "kind": "parallel", "parts": parts }))
            }
            SequenceFunction::Composite(comp) => {
                let mut components = Vec::new();
                for (i, component) in comp.components().iter().enumerate() {
                    let component_name = format!("{name}__c{i}");
                    let component_def = self.function_value(&component_name, component)?;
                    self.functions.insert(component_name.clone(), component_def);
                    components.push(Value::from(component_name));
                }
                let routing = self.routing_value(comp.routing());
                Ok(serde_json::json!({
                    "kind": "composite",
                    "components": components,
                    "routing": routing,
                }))
            }
        }
    }

    fn routing_value(&mut self, routing: &RoutingSpec) -> Value {
        let global = self.alphabet_name(routing.global_alphabet());
        let rules: Vec<Value> = (0..routing.component_count())
            .map(|i| {
                routing
                    .rules(i)
                    .iter()
                    .map(|rule| {
                        serde_json::json!({
                            "when": guard_to_json(&rule.when),
                            "emit": rule.emit.clone(),
                        })
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({ "global": global, "rules": rules })
    }

    pub fn add_machine(&mut self, name: &str, machine: &MooreMachine) -> DocResult<()> {
        let alphabet = self.alphabet_name(machine.alphabet());
        let states: Vec<String> = (0..machine.state_count()).map(|s| s.to_string()).collect();
        let mut delta = Map::new();
        let mut lambda = Map::new();
        for state in 0..machine.state_count() {
            let mut row = Map::new();
            for event in 0..machine.alphabet().len() as u32 {
                row.insert(
                    machine.alphabet().symbol(event).to_string(),
                    Value::from(machine.successor(state, event).to_string()),
                );
            }
            delta.insert(states[state].clone(), Value::Object(row));
            lambda.insert(states[state].clone(), value_to_json(machine.output(state)));
        }
        self.machines.insert(
            name.to_string(),
            serde_json::json!({
                "alphabet": alphabet,
                "states": states,
                "start": machine.start_state().to_string(),
                "delta": delta,
                "lambda": lambda,
                "outputs": machine.output_set().iter().map(value_to_json).collect::<Vec<_>>(),
            }),
        );
        Ok(())
    }

    pub fn add_predicate(&mut self, name: &str, predicate: &Predicate) {
        self.predicates
            .insert(name.to_string(), predicate_to_json(predicate));
    }

    pub fn finish(self) -> Value {
        let mut root = Map::new();
        if !self.alphabets.is_empty() {
            let mut section = Map::new();
            for (name, alphabet) in &self.alphabets {
                section.insert(
                    name.clone(),
                    Value::from(alphabet.events().to_vec()),
                );
            }
            root.insert("alphabets".into(), Value::Object(section));
        }
        if !self.functions.is_empty() {
            root.insert(
                "functions".into(),
                Value::Object(self.functions.into_iter().collect()),
            );
        }
        if !self.machines.is_empty() {
            root.insert(
                "machines".into(),
                Value::Object(self.machines.into_iter().collect()),
            );
        }
        if !self.predicates.is_empty() {
            root.insert(
                "predicates".into(),
                Value::Object(self.predicates.into_iter().collect()),
            );
        }
        Value::Object(root)
    }
}

/// An output value as document JSON.
pub fn value_to_json(value: &seqfn::OutputValue) -> Value {
    match value {
        seqfn::OutputValue::Int(v) => Value::from(*v),
        seqfn::OutputValue::Symbol(s) => Value::from(s.as_ref()),
        seqfn::OutputValue::Tuple(items) => {
            Value::Array(items.iter().map(value_to_json).collect())
        }
    }
}

fn value_key(value: &seqfn::OutputValue, name: &str) -> DocResult<String> {
    match value {
        seqfn::OutputValue::Tuple(_) => Err(DocError::new(
            name,
            "tuple values cannot appear as table keys",
        )),
        other => Ok(other.to_string()),
    }
}

fn guard_to_json(guard: &Guard) -> Value {
    match guard {
        Guard::And(gs) if gs.is_empty() => Value::Bool(true),
        Guard::Or(gs) if gs.is_empty() => Value::Bool(false),
        Guard::And(gs) => {
            serde_json::json!({ "and": gs.iter().map(guard_to_json).collect::<Vec<_>>() })
        }
        Guard::Or(gs) => {
            serde_json::json!({ "or": gs.iter().map(guard_to_json).collect::<Vec<_>>() })
        }
        Guard::Not(g) => serde_json::json!({ "not": guard_to_json(g) }),
        Guard::Event { symbol, negated } => serde_json::json!({
            "op": if *negated { "ne" } else { "eq" },
            "lhs": { "event": true },
            "rhs": symbol,
        }),
        Guard::Slot {
            slot,
            proj,
            op,
            value,
        } => {
            let mut lhs = Map::new();
            lhs.insert("slot".into(), Value::from(slot + 1));
            if let Some(p) = proj {
                lhs.insert("proj".into(), Value::from(*p));
            }
            serde_json::json!({
                "op": cmp_name(*op),
                "lhs": lhs,
                "rhs": value_to_json(value),
            })
        }
    }
}

fn predicate_to_json(predicate: &Predicate) -> Value {
    match predicate {
        Predicate::And(ps) => {
            serde_json::json!({ "and": ps.iter().map(predicate_to_json).collect::<Vec<_>>() })
        }
        Predicate::Or(ps) => {
            serde_json::json!({ "or": ps.iter().map(predicate_to_json).collect::<Vec<_>>() })
        }
        Predicate::Not(p) => serde_json::json!({ "not": predicate_to_json(p) }),
        Predicate::Slot {
            slot,
            proj,
            op,
            value,
        } => {
            let mut lhs = Map::new();
            lhs.insert("slot".into(), Value::from(slot + 1));
            if let Some(p) = proj {
                lhs.insert("proj".into(), Value::from(*p));
            }
            serde_json::json!({
                "op": cmp_name(*op),
                "lhs": lhs,
                "rhs": value_to_json(value),
            })
        }
        Predicate::Count {
            slots,
            values,
            op,
            bound,
        } => serde_json::json!({
            "count": {
                "slots": slots.iter().map(|s| s + 1).collect::<Vec<_>>(),
                "in": values.iter().map(value_to_json).collect::<Vec<_>>(),
            },
            "cmp": cmp_name(*op),
            "rhs": bound,
        }),
    }
}

fn cmp_name(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "eq",
        CmpOp::Ne => "ne",
        CmpOp::Lt => "lt",
        CmpOp::Le => "le",
        CmpOp::Gt => "gt",
        CmpOp::Ge => "ge",
    }
}

// ---------------------------------------------------------------------
// JSON access helpers carrying the diagnostic path.

fn as_object<'a>(value: &'a Value, path: &str) -> DocResult<&'a Map<String, Value>> {
    value
        .as_object()
        .ok_or_else(|| DocError::new(path, "expected an object"))
}

fn as_array<'a>(value: &'a Value, path: &str) -> DocResult<&'a Vec<Value>> {
    value
        .as_array()
        .ok_or_else(|| DocError::new(path, "expected an array"))
}

fn as_string(value: &Value, path: &str) -> DocResult<String> {
    value
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| DocError::new(path, "expected a string"))
}

fn as_int(value: &Value, path: &str) -> DocResult<i64> {
    value
        .as_i64()
        .ok_or_else(|| DocError::new(path, "expected an integer"))
}

fn as_index(value: &Value, path: &str) -> DocResult<usize> {
    let v = as_int(value, path)?;
    usize::try_from(v).map_err(|_| DocError::new(path, "expected a non-negative index"))
}

fn to_zero_based(index: usize, path: &str) -> DocResult<usize> {
    index
        .checked_sub(1)
        .ok_or_else(|| DocError::new(path, "slot indices are 1-based"))
}

fn parse_slot_index(lhs: &Map<String, Value>, path: &str) -> DocResult<usize> {
    let slot_path = format!("{path}.lhs.slot");
    let raw = lhs
        .get("slot")
        .ok_or_else(|| DocError::new(format!("{path}.lhs"), "expected a slot or event"))?;
    to_zero_based(as_index(raw, &slot_path)?, &slot_path)
}

fn required<'a>(object: &'a Map<String, Value>, key: &str, path: &str) -> DocResult<&'a Value> {
    object
        .get(key)
        .ok_or_else(|| DocError::new(path, format!("missing required key {key:?}")))
}

fn expect_only(object: &Map<String, Value>, allowed: &[&str], path: &str) -> DocResult<()> {
    for key in object.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(DocError::new(
                format!("{path}.{key}"),
                "unknown key",
            ));
        }
    }
    Ok(())
}

fn lookup_alphabet(
    object: &Map<String, Value>,
    path: &str,
    registry: &Registry,
) -> DocResult<Alphabet> {
    let alphabet_path = format!("{path}.alphabet");
    let name = as_string(required(object, "alphabet", path)?, &alphabet_path)?;
    registry.alphabets.get(&name).cloned().ok_or_else(|| {
        DocError::new(alphabet_path, format!("unresolved alphabet name {name:?}"))
    })
}

/// A scalar value from an object key: integers parse as integers,
/// anything else is a symbol.
fn parse_key(key: &str) -> seqfn::OutputValue {
    match key.parse::<i64>() {
        Ok(v) => seqfn::OutputValue::Int(v),
        Err(_) => seqfn::OutputValue::symbol(key),
    }
}

fn parse_value(value: &Value, path: &str) -> DocResult<seqfn::OutputValue> {
    match value {
        Value::Number(_) => Ok(seqfn::OutputValue::Int(as_int(value, path)?)),
        Value::String(s) => Ok(seqfn::OutputValue::symbol(s)),
        Value::Array(items) => Ok(seqfn::OutputValue::Tuple(
            items
                .iter()
                .enumerate()
                .map(|(i, v)| parse_value(v, &format!("{path}.{i}")))
                .collect::<DocResult<Vec<_>>>()?,
        )),
        _ => Err(DocError::new(
            path,
            "expected an integer, a string, or an array",
        )),
    }
}

fn parse_cmp(name: &str, path: &str) -> DocResult<CmpOp> {
    match name {
        "eq" => Ok(CmpOp::Eq),
        "ne" => Ok(CmpOp::Ne),
        "lt" => Ok(CmpOp::Lt),
        "le" => Ok(CmpOp::Le),
        "gt" => Ok(CmpOp::Gt),
        "ge" => Ok(CmpOp::Ge),
        other => Err(DocError::new(
            path,
            format!("unknown comparison {other:?}"),
        )),
    }
}

fn parse_count_cmp(name: &str, path: &str) -> DocResult<CmpOp> {
    match name {
        "le" => Ok(CmpOp::Le),
        "lt" => Ok(CmpOp::Lt),
        "eq" => Ok(CmpOp::Eq),
        "ge" => Ok(CmpOp::Ge),
        "gt" => Ok(CmpOp::Gt),
        other => Err(DocError::new(
            path,
            format!("counting comparisons allow le, lt, eq, ge, gt; got {other:?}"),
        )),
    }
}

fn optional_max_states(object: &Map<String, Value>, path: &str) -> DocResult<usize> {
    match object.get("maxStates") {
        None => Ok(DEFAULT_MAX_STATES),
        Some(v) => as_index(v, &format!("{path}.maxStates")),
    }
}
