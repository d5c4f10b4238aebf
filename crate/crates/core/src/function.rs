//! Sequence functions: state variables defined by primitive recursion on
//! event sequences, output-mapped (hidden-state) variables, parallel
//! tuples, and routed composites.
//!
//! A sequence function maps every finite event sequence over its alphabet
//! to an output value. The primitive-recursive form is given by an initial
//! value and a step rule applied once per event; the other forms are built
//! on top of it.

use crate::alphabet::{Alphabet, EventSequence};
use crate::compose::Composite;
use crate::error::{Error, Result};
use crate::value::{compare_values, CmpOp, OutputDomain, OutputValue};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Largest counter modulus the library will materialize a domain for.
pub const MAX_COUNTER_MODULUS: i64 = 1_000_000;

/// Cap on how many values a domain may hold before eager output-map
/// totality checks are deferred to evaluation time.
const MAP_CHECK_CAP: usize = 1 << 16;

const INCREMENT: &str = "increment";
const RESET: &str = "reset";

/// A state variable defined by primitive recursion: an initial value plus
/// a step rule mapping (event, current value) to the next value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimRecDef {
    alphabet: Alphabet,
    domain: OutputDomain,
    init: OutputValue,
    step: StepRule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum StepRule {
    /// Finite table keyed by (event id, current value); total over
    /// alphabet x domain by construction.
    Table(HashMap<(u32, OutputValue), OutputValue>),
    /// Builtin counter rule: `increment` adds one (mod k when bounded),
    /// `reset` returns to zero, every other event leaves the value alone.
    Counter {
        modulus: Option<i64>,
        increment: u32,
        reset: u32,
    },
}

impl PrimRecDef {
    /// Builds a table-form definition and checks the declared invariants:
    /// the initial value lies in the domain, the table is total over
    /// alphabet x domain, and every produced value stays in the domain.
    pub fn new<I, S>(
        alphabet: Alphabet,
        domain: Vec<OutputValue>,
        init: OutputValue,
        step: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = ((S, OutputValue), OutputValue)>,
        S: AsRef<str>,
    {
        if !domain.contains(&init) {
            return Err(Error::InitOutsideDomain(init));
        }
        let mut table = HashMap::new();
        for ((event, value), next) in step {
            let event = event.as_ref();
            let id = alphabet.index_of(event).ok_or_else(|| Error::ForeignEvent {
                symbol: event.to_string(),
                position: 0,
            })?;
            if !domain.contains(&value) {
                return Err(Error::StepOutsideDomain {
                    event: event.to_string(),
                    value,
                });
            }
            if !domain.contains(&next) {
                return Err(Error::StepEscapesDomain { produced: next });
            }
            table.insert((id, value), next);
        }
        for id in alphabet.ids() {
            for value in &domain {
                if !table.contains_key(&(id, value.clone())) {
                    return Err(Error::StepIncomplete {
                        event: alphabet.symbol(id).to_string(),
                        value: value.clone(),
                    });
                }
            }
        }
        Ok(PrimRecDef {
            alphabet,
            domain: OutputDomain::Explicit(domain),
            init,
            step: StepRule::Table(table),
        })
    }

    fn counter(modulus: Option<i64>, alphabet: Alphabet) -> Result<Self> {
        if let Some(k) = modulus {
            if k < 1 {
                return Err(Error::InvalidModulus { value: k, min: 1 });
            }
            if k > MAX_COUNTER_MODULUS {
                return Err(Error::ModulusTooLarge(k));
            }
        }
        let increment = alphabet
            .index_of(INCREMENT)
            .ok_or(Error::MissingCounterEvent(INCREMENT))?;
        let reset = alphabet
            .index_of(RESET)
            .ok_or(Error::MissingCounterEvent(RESET))?;
        let domain = match modulus {
            Some(k) => OutputDomain::Explicit((0..k).map(OutputValue::Int).collect()),
            None => OutputDomain::UnboundedInt,
        };
        Ok(PrimRecDef {
            alphabet,
            domain,
            init: OutputValue::Int(0),
            step: StepRule::Counter {
                modulus,
                increment,
                reset,
            },
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn domain(&self) -> &OutputDomain {
        &self.domain
    }

    pub fn init(&self) -> &OutputValue {
        &self.init
    }

    /// `Some(Some(k))` for a bounded counter, `Some(None)` for an
    /// unbounded one, `None` for a table-form definition.
    pub fn as_counter(&self) -> Option<Option<i64>> {
        match &self.step {
            StepRule::Counter { modulus, .. } => Some(*modulus),
            StepRule::Table(_) => None,
        }
    }

    /// One step of the defining recursion.
    pub fn apply_step(&self, event: &str, value: &OutputValue) -> Result<OutputValue> {
        let id = self.alphabet.index_of(event).ok_or_else(|| Error::ForeignEvent {
            symbol: event.to_string(),
            position: 0,
        })?;
        self.step_id(id, value)
    }

    fn step_id(&self, event: u32, value: &OutputValue) -> Result<OutputValue> {
        match &self.step {
            StepRule::Table(table) => table
                .get(&(event, value.clone()))
                .cloned()
                .ok_or_else(|| Error::StepIncomplete {
                    event: self.alphabet.symbol(event).to_string(),
                    value: value.clone(),
                }),
            StepRule::Counter {
                modulus,
                increment,
                reset,
            } => {
                let current = value.as_int().ok_or_else(|| Error::StepIncomplete {
                    event: self.alphabet.symbol(event).to_string(),
                    value: value.clone(),
                })?;
                let next = if event == *increment {
                    match modulus {
                        Some(k) => (current + 1).rem_euclid(*k),
                        None => current.checked_add(1).ok_or(Error::CounterOverflow)?,
                    }
                } else if event == *reset {
                    0
                } else {
                    current
                };
                Ok(OutputValue::Int(next))
            }
        }
    }
}

/// A test applied to one value by an output-map rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueTest {
    Compare(CmpOp, OutputValue),
    Any,
}

impl ValueTest {
    fn matches(&self, value: &OutputValue) -> Result<bool> {
        match self {
            ValueTest::Compare(op, rhs) => compare_values(*op, value, rhs),
            ValueTest::Any => Ok(true),
        }
    }
}

/// One guarded entry of a rule-form output map; the first matching rule wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapRule {
    pub test: ValueTest,
    pub result: OutputValue,
}

/// A map applied to the output of an inner sequence function.
///
/// A value with no table entry and no matching rule is a hard error, never
/// a pass-through.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputMap {
    Table(Vec<(OutputValue, OutputValue)>),
    Rules(Vec<MapRule>),
}

impl OutputMap {
    pub fn table<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (OutputValue, OutputValue)>,
    {
        OutputMap::Table(pairs.into_iter().collect())
    }

    pub fn rules<I>(rules: I) -> Self
    where
        I: IntoIterator<Item = MapRule>,
    {
        OutputMap::Rules(rules.into_iter().collect())
    }

    /// Builds a table by applying `f` to every value of `domain`.
    pub fn table_from_fn(
        domain: &[OutputValue],
        f: impl Fn(&OutputValue) -> OutputValue,
    ) -> Self {
        OutputMap::Table(domain.iter().map(|v| (v.clone(), f(v))).collect())
    }

    pub fn apply(&self, value: &OutputValue) -> Result<OutputValue> {
        match self {
            OutputMap::Table(pairs) => pairs
                .iter()
                .find(|(from, _)| from == value)
                .map(|(_, to)| to.clone())
                .ok_or_else(|| Error::UnmappedValue(value.clone())),
            OutputMap::Rules(rules) => {
                for rule in rules {
                    if rule.test.matches(value)? {
                        return Ok(rule.result.clone());
                    }
                }
                Err(Error::UnmappedValue(value.clone()))
            }
        }
    }

    /// The values this map can produce, in first-appearance order.
    fn range(&self) -> Vec<OutputValue> {
        let mut out: Vec<OutputValue> = Vec::new();
        let results: Vec<&OutputValue> = match self {
            OutputMap::Table(pairs) => pairs.iter().map(|(_, to)| to).collect(),
            OutputMap::Rules(rules) => rules.iter().map(|r| &r.result).collect(),
        };
        for value in results {
            if !out.contains(value) {
                out.push(value.clone());
            }
        }
        out
    }
}

/// An output-mapped function: `map` applied to the result of `inner`.
#[derive(Debug)]
pub struct MappedDef {
    inner: SequenceFunction,
    map: OutputMap,
}

impl MappedDef {
    pub fn inner(&self) -> &SequenceFunction {
        &self.inner
    }

    pub fn map(&self) -> &OutputMap {
        &self.map
    }
}

/// A tuple of functions evaluated in parallel over one alphabet.
#[derive(Debug)]
pub struct ParallelDef {
    alphabet: Alphabet,
    parts: Vec<SequenceFunction>,
}

impl ParallelDef {
    pub fn parts(&self) -> &[SequenceFunction] {
        &self.parts
    }
}

/// A function from finite event sequences to output values.
///
/// Cloning is cheap; the definition is shared. All forms are immutable
/// after construction and every operation on them is pure.
#[derive(Debug, Clone)]
pub enum SequenceFunction {
    PrimRec(Arc<PrimRecDef>),
    Mapped(Arc<MappedDef>),
    Parallel(Arc<ParallelDef>),
    Composite(Arc<Composite>),
}

/// Internal evaluation state: what a machine state will be compiled from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Config {
    /// Current value of a primitive-recursive variable. An output-mapped
    /// function shares its inner function's configuration.
    Value(OutputValue),
    /// Per-part configurations of a parallel tuple or routed composite.
    Parts(Vec<Config>),
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Config::Value(v) => write!(f, "{v}"),
            Config::Parts(parts) => {
                write!(f, "(")?;
                for (i, part) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{part}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl SequenceFunction {
    /// A counter mod `k` over the alphabet `{increment, reset}`.
    pub fn counter(k: i64) -> Result<Self> {
        Self::counter_in(k, Self::counter_alphabet())
    }

    /// A counter mod `k` over a caller-supplied alphabet. The alphabet must
    /// contain `increment` and `reset`; every other event leaves the value
    /// unchanged, so counters embed in composites with richer alphabets.
    pub fn counter_in(k: i64, alphabet: Alphabet) -> Result<Self> {
        Ok(SequenceFunction::PrimRec(Arc::new(PrimRecDef::counter(
            Some(k),
            alphabet,
        )?)))
    }

    /// An infinite-state counter: no modulus, cannot be compiled.
    pub fn unbounded_counter() -> Self {
        SequenceFunction::PrimRec(Arc::new(
            PrimRecDef::counter(None, Self::counter_alphabet()).expect("default alphabet"),
        ))
    }

    /// An infinite-state counter over a caller-supplied alphabet.
    pub fn unbounded_counter_in(alphabet: Alphabet) -> Result<Self> {
        Ok(SequenceFunction::PrimRec(Arc::new(PrimRecDef::counter(
            None, alphabet,
        )?)))
    }

    fn counter_alphabet() -> Alphabet {
        Alphabet::new([INCREMENT, RESET]).expect("static alphabet")
    }

    /// Applies `map` to the output of `inner`.
    ///
    /// Table maps must be total over the inner function's output domain;
    /// the check runs eagerly when that domain enumerates within a cap and
    /// is otherwise deferred to evaluation, where a miss is still an error.
    pub fn mapped(inner: SequenceFunction, map: OutputMap) -> Result<Self> {
        match inner.enumerated_output_domain(MAP_CHECK_CAP) {
            None => {
                if matches!(map, OutputMap::Table(_)) && inner.has_unbounded_domain() {
                    return Err(Error::MapNeedsRules);
                }
            }
            Some(domain) => {
                if let OutputMap::Table(_) = &map {
                    for value in &domain {
                        if let Err(Error::UnmappedValue(v)) = map.apply(value) {
                            return Err(Error::MapIncomplete(v));
                        }
                    }
                }
            }
        }
        Ok(SequenceFunction::Mapped(Arc::new(MappedDef { inner, map })))
    }

    /// The tuple of `parts` evaluated in parallel over one shared alphabet.
    pub fn parallel(parts: Vec<SequenceFunction>) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyParallel)?;
        let alphabet = first.alphabet().clone();
        for part in &parts[1..] {
            if *part.alphabet() != alphabet {
                return Err(Error::AlphabetMismatch {
                    expected: alphabet.to_string(),
                    actual: part.alphabet().to_string(),
                });
            }
        }
        Ok(SequenceFunction::Parallel(Arc::new(ParallelDef {
            alphabet,
            parts,
        })))
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            SequenceFunction::PrimRec(def) => def.alphabet(),
            SequenceFunction::Mapped(def) => def.inner.alphabet(),
            SequenceFunction::Parallel(def) => &def.alphabet,
            SequenceFunction::Composite(comp) => comp.global_alphabet(),
        }
    }

    /// The routed composite behind this function, when it is one.
    pub fn as_composite(&self) -> Option<&Composite> {
        match self {
            SequenceFunction::Composite(comp) => Some(comp),
            _ => None,
        }
    }

    /// True when an unbounded-integer domain occurs anywhere inside; such
    /// functions evaluate fine but cannot be compiled.
    pub fn has_unbounded_domain(&self) -> bool {
        match self {
            SequenceFunction::PrimRec(def) => def.domain().is_unbounded(),
            SequenceFunction::Mapped(def) => def.inner.has_unbounded_domain(),
            SequenceFunction::Parallel(def) => {
                def.parts.iter().any(SequenceFunction::has_unbounded_domain)
            }
            SequenceFunction::Composite(comp) => comp
                .components()
                .iter()
                .any(SequenceFunction::has_unbounded_domain),
        }
    }

    /// The output domain: explicit values where finitely presented,
    /// the unbounded marker otherwise. Tuple-shaped domains (parallel,
    /// composite) are products of the member domains.
    pub fn output_domain(&self) -> OutputDomain {
        match self.enumerated_output_domain(MAP_CHECK_CAP) {
            Some(values) => OutputDomain::Explicit(values),
            None => OutputDomain::UnboundedInt,
        }
    }

    /// Enumerates the output domain when it is finite and no larger than
    /// `cap`; `None` otherwise.
    pub(crate) fn enumerated_output_domain(&self, cap: usize) -> Option<Vec<OutputValue>> {
        match self {
            SequenceFunction::PrimRec(def) => match def.domain() {
                OutputDomain::Explicit(values) if values.len() <= cap => Some(values.clone()),
                _ => None,
            },
            SequenceFunction::Mapped(def) => {
                let range = def.map.range();
                if range.len() <= cap {
                    Some(range)
                } else {
                    None
                }
            }
            SequenceFunction::Parallel(def) => {
                product_domain(def.parts.iter().map(|p| p.enumerated_output_domain(cap)), cap)
            }
            SequenceFunction::Composite(comp) => product_domain(
                comp.components()
                    .iter()
                    .map(|c| c.enumerated_output_domain(cap)),
                cap,
            ),
        }
    }

    /// Evaluates this function on `s` by the defining recursion.
    pub fn evaluate(&self, s: &EventSequence) -> Result<OutputValue> {
        let ids = s.ids_in(self.alphabet())?;
        let mut config = self.initial_config();
        for &id in ids.iter() {
            config = self.step_config(&config, id)?;
        }
        self.config_output(&config)
    }

    /// The outputs of every prefix of `s`, in order; the first entry is the
    /// output at the empty sequence and the last equals `evaluate(s)`.
    pub fn trace(&self, s: &EventSequence) -> Result<Vec<OutputValue>> {
        let ids = s.ids_in(self.alphabet())?;
        let mut config = self.initial_config();
        let mut outputs = Vec::with_capacity(ids.len() + 1);
        outputs.push(self.config_output(&config)?);
        for &id in ids.iter() {
            config = self.step_config(&config, id)?;
            outputs.push(self.config_output(&config)?);
        }
        Ok(outputs)
    }

    pub(crate) fn initial_config(&self) -> Config {
        match self {
            SequenceFunction::PrimRec(def) => Config::Value(def.init().clone()),
            SequenceFunction::Mapped(def) => def.inner.initial_config(),
            SequenceFunction::Parallel(def) => {
                Config::Parts(def.parts.iter().map(|p| p.initial_config()).collect())
            }
            SequenceFunction::Composite(comp) => Config::Parts(
                comp.components()
                    .iter()
                    .map(|c| c.initial_config())
                    .collect(),
            ),
        }
    }

    /// Advances a configuration by one event of this function's alphabet.
    pub(crate) fn step_config(&self, config: &Config, event: u32) -> Result<Config> {
        match (self, config) {
            (SequenceFunction::PrimRec(def), Config::Value(value)) => {
                Ok(Config::Value(def.step_id(event, value)?))
            }
            (SequenceFunction::Mapped(def), _) => def.inner.step_config(config, event),
            (SequenceFunction::Parallel(def), Config::Parts(parts)) => {
                let mut next = Vec::with_capacity(parts.len());
                for (part, part_config) in def.parts.iter().zip(parts) {
                    next.push(part.step_config(part_config, event)?);
                }
                Ok(Config::Parts(next))
            }
            (SequenceFunction::Composite(comp), Config::Parts(parts)) => {
                comp.step_parts(parts, event)
            }
            _ => unreachable!("configuration shape does not match the function"),
        }
    }

    /// The output named by a configuration.
    pub(crate) fn config_output(&self, config: &Config) -> Result<OutputValue> {
        match (self, config) {
            (SequenceFunction::PrimRec(_), Config::Value(value)) => Ok(value.clone()),
            (SequenceFunction::Mapped(def), _) => {
                def.map.apply(&def.inner.config_output(config)?)
            }
            (SequenceFunction::Parallel(def), Config::Parts(parts)) => {
                let mut out = Vec::with_capacity(parts.len());
                for (part, part_config) in def.parts.iter().zip(parts) {
                    out.push(part.config_output(part_config)?);
                }
                Ok(OutputValue::Tuple(out))
            }
            (SequenceFunction::Composite(comp), Config::Parts(parts)) => {
                comp.parts_output(parts)
            }
            _ => unreachable!("configuration shape does not match the function"),
        }
    }
}

/// Incremental evaluation of one sequence function: feed events one at a
/// time and read the current output. Stepping through a whole sequence
/// gives exactly `evaluate` of that sequence.
#[derive(Debug, Clone)]
pub struct Evaluator {
    function: SequenceFunction,
    config: Config,
}

impl Evaluator {
    pub fn new(function: &SequenceFunction) -> Self {
        Evaluator {
            function: function.clone(),
            config: function.initial_config(),
        }
    }

    /// Consumes one event.
    pub fn step(&mut self, symbol: &str) -> Result<()> {
        let id = self
            .function
            .alphabet()
            .index_of(symbol)
            .ok_or_else(|| Error::ForeignEvent {
                symbol: symbol.to_string(),
                position: 0,
            })?;
        self.config = self.function.step_config(&self.config, id)?;
        Ok(())
    }

    /// The output after the events consumed so far.
    pub fn output(&self) -> Result<OutputValue> {
        self.function.config_output(&self.config)
    }

    /// Forgets all consumed events.
    pub fn reset(&mut self) {
        self.config = self.function.initial_config();
    }
}

impl From<PrimRecDef> for SequenceFunction {
    fn from(def: PrimRecDef) -> Self {
        SequenceFunction::PrimRec(Arc::new(def))
    }
}

impl From<Composite> for SequenceFunction {
    fn from(comp: Composite) -> Self {
        SequenceFunction::Composite(Arc::new(comp))
    }
}

/// Cartesian product of member domains as tuples, bounded by `cap`.
fn product_domain<I>(members: I, cap: usize) -> Option<Vec<OutputValue>>
where
    I: Iterator<Item = Option<Vec<OutputValue>>>,
{
    let domains: Option<Vec<Vec<OutputValue>>> = members.collect();
    let domains = domains?;
    let mut size: usize = 1;
    for domain in &domains {
        size = size.checked_mul(domain.len())?;
        if size > cap {
            return None;
        }
    }
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
    }
    Some(tuples.into_iter().map(OutputValue::Tuple).collect())
}
