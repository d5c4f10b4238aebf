//! Routed feedback composition: several sequence functions driven by one
//! global event stream, where a routing map turns each global event plus
//! the current component outputs into a local event sequence per component.
//!
//! Routing always reads the component outputs as they were *before* the
//! global event is applied. All components then advance against that same
//! snapshot, so the update order between components cannot affect results.

use crate::alphabet::{Alphabet, EventSequence};
use crate::error::{Error, Result};
use crate::function::{Config, SequenceFunction};
use crate::value::{compare_values, CmpOp, OutputValue};

/// A boolean guard over the current global event and the component
/// output tuple.
///
/// `And([])` is true and `Or([])` is false. Ordering comparisons are only
/// valid between integer values. Slot indices are zero-based; a slot
/// holding a tuple can be narrowed with a projection index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    And(Vec<Guard>),
    Or(Vec<Guard>),
    Not(Box<Guard>),
    /// Compares the global event to a symbol.
    Event { symbol: String, negated: bool },
    /// Compares one output slot (optionally projected) to a constant.
    Slot {
        slot: usize,
        proj: Option<usize>,
        op: CmpOp,
        value: OutputValue,
    },
}

impl Guard {
    pub fn event_is(symbol: impl Into<String>) -> Self {
        Guard::Event {
            symbol: symbol.into(),
            negated: false,
        }
    }

    pub fn slot_is(slot: usize, value: impl Into<OutputValue>) -> Self {
        Guard::Slot {
            slot,
            proj: None,
            op: CmpOp::Eq,
            value: value.into(),
        }
    }

    pub fn slot_compares(slot: usize, op: CmpOp, value: impl Into<OutputValue>) -> Self {
        Guard::Slot {
            slot,
            proj: None,
            op,
            value: value.into(),
        }
    }

    pub fn and(guards: impl IntoIterator<Item = Guard>) -> Self {
        Guard::And(guards.into_iter().collect())
    }

    pub fn or(guards: impl IntoIterator<Item = Guard>) -> Self {
        Guard::Or(guards.into_iter().collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(guard: Guard) -> Self {
        Guard::Not(Box::new(guard))
    }

    fn validate(&self, component_count: usize, global: &Alphabet) -> Result<()> {
        match self {
            Guard::And(gs) | Guard::Or(gs) => gs
                .iter()
                .try_for_each(|g| g.validate(component_count, global)),
            Guard::Not(g) => g.validate(component_count, global),
            Guard::Event { symbol, .. } => {
                if global.contains(symbol) {
                    Ok(())
                } else {
                    Err(Error::GuardEventUnknown {
                        symbol: symbol.clone(),
                    })
                }
            }
            Guard::Slot { slot, op, value, .. } => {
                if *slot >= component_count {
                    return Err(Error::SlotOutOfRange {
                        slot: *slot,
                        count: component_count,
                    });
                }
                if op.is_ordering() && value.as_int().is_none() {
                    return Err(Error::OrderedComparisonOnNonInteger(value.clone()));
                }
                Ok(())
            }
        }
    }

    fn satisfied(&self, event: &str, outputs: &[OutputValue]) -> Result<bool> {
        match self {
            Guard::And(gs) => {
                for g in gs {
                    if !g.satisfied(event, outputs)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Guard::Or(gs) => {
                for g in gs {
                    if g.satisfied(event, outputs)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Guard::Not(g) => Ok(!g.satisfied(event, outputs)?),
            Guard::Event { symbol, negated } => Ok((event == symbol) != *negated),
            Guard::Slot {
                slot,
                proj,
                op,
                value,
            } => {
                let slot_value = outputs.get(*slot).ok_or(Error::SlotOutOfRange {
                    slot: *slot,
                    count: outputs.len(),
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
        }
    }
}

/// One routing rule: when the guard holds, emit the listed local events.
/// Within a component's rule list the first matching rule wins; when no
/// rule matches, the component sees nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedRule {
    pub when: Guard,
    pub emit: Vec<String>,
}

impl GuardedRule {
    pub fn new(when: Guard, emit: impl IntoIterator<Item = impl Into<String>>) -> Self {
        GuardedRule {
            when,
            emit: emit.into_iter().map(Into::into).collect(),
        }
    }
}

/// The routing map of a composite: for each component, an ordered rule
/// list turning (global event, output tuple) into a local event sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingSpec {
    global: Alphabet,
    locals: Vec<Alphabet>,
    rules: Vec<Vec<GuardedRule>>,
    emit_ids: Vec<Vec<Vec<u32>>>,
}

impl RoutingSpec {
    pub fn new(
        global: Alphabet,
        locals: Vec<Alphabet>,
        rules: Vec<Vec<GuardedRule>>,
    ) -> Result<Self> {
        let n = locals.len();
        if n == 0 || rules.len() != n {
            return Err(Error::ComponentCountMismatch {
                expected: n,
                actual: rules.len(),
            });
        }
        let mut emit_ids = Vec::with_capacity(n);
        for (component, component_rules) in rules.iter().enumerate() {
            let local = &locals[component];
            let mut per_rule = Vec::with_capacity(component_rules.len());
            for rule in component_rules {
                rule.when.validate(n, &global)?;
                let mut ids = Vec::with_capacity(rule.emit.len());
                for symbol in &rule.emit {
                    match local.index_of(symbol) {
                        Some(id) => ids.push(id),
                        None => {
                            return Err(Error::EmissionOutsideAlphabet {
                                component,
                                symbol: symbol.clone(),
                            })
                        }
                    }
                }
                per_rule.push(ids);
            }
            emit_ids.push(per_rule);
        }
        Ok(RoutingSpec {
            global,
            locals,
            rules,
            emit_ids,
        })
    }

    pub fn component_count(&self) -> usize {
        self.locals.len()
    }

    pub fn global_alphabet(&self) -> &Alphabet {
        &self.global
    }

    pub fn local_alphabet(&self, component: usize) -> &Alphabet {
        &self.locals[component]
    }

    pub fn rules(&self, component: usize) -> &[GuardedRule] {
        &self.rules[component]
    }

    /// The local events component `component` sees when `event` arrives
    /// while the component outputs read `outputs`: the emission of the
    /// first matching rule, or the empty sequence when none matches.
    pub fn route(
        &self,
        component: usize,
        event: &str,
        outputs: &[OutputValue],
    ) -> Result<EventSequence> {
        if outputs.len() != self.component_count() {
            return Err(Error::ArityMismatch {
                expected: self.component_count(),
                actual: outputs.len(),
            });
        }
        if !self.global.contains(event) {
            return Err(Error::ForeignEvent {
                symbol: event.to_string(),
                position: 0,
            });
        }
        let local = &self.locals[component];
        for (rule, ids) in self.rules[component].iter().zip(&self.emit_ids[component]) {
            if rule.when.satisfied(event, outputs)? {
                return Ok(EventSequence::from_ids(local, ids.clone()));
            }
        }
        Ok(EventSequence::empty(local))
    }

    fn route_ids(&self, component: usize, event: &str, outputs: &[OutputValue]) -> Result<&[u32]> {
        for (rule, ids) in self.rules[component].iter().zip(&self.emit_ids[component]) {
            if rule.when.satisfied(event, outputs)? {
                return Ok(ids);
            }
        }
        Ok(&[])
    }
}

/// A routed composite: `n` component functions over their local alphabets
/// plus the routing map that feeds them from the global sequence.
#[derive(Debug)]
pub struct Composite {
    components: Vec<SequenceFunction>,
    routing: RoutingSpec,
}

impl Composite {
    pub fn new(components: Vec<SequenceFunction>, routing: RoutingSpec) -> Result<Self> {
        if components.len() != routing.component_count() {
            return Err(Error::ComponentCountMismatch {
                expected: routing.component_count(),
                actual: components.len(),
            });
        }
        for (i, component) in components.iter().enumerate() {
            if *component.alphabet() != *routing.local_alphabet(i) {
                return Err(Error::AlphabetMismatch {
                    expected: routing.local_alphabet(i).to_string(),
                    actual: component.alphabet().to_string(),
                });
            }
        }
        Ok(Composite {
            components,
            routing,
        })
    }

    pub fn components(&self) -> &[SequenceFunction] {
        &self.components
    }

    pub fn routing(&self) -> &RoutingSpec {
        &self.routing
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn global_alphabet(&self) -> &Alphabet {
        self.routing.global_alphabet()
    }

    /// The local sequence each component has seen after the whole of `s`.
    ///
    /// This is the definitional recursion, kept deliberately literal: at
    /// each global event the current outputs are recomputed from the local
    /// sequences built so far, then each component's routed emission is
    /// concatenated on. It is the reference that the incremental
    /// [`Composite::evaluate`] is tested against; expect quadratic cost in
    /// the length of `s`.
    pub fn local_sequences(&self, s: &EventSequence) -> Result<Vec<EventSequence>> {
        let ids = s.ids_in(self.global_alphabet())?;
        let mut locals: Vec<EventSequence> = self
            .components
            .iter()
            .enumerate()
            .map(|(i, _)| EventSequence::empty(self.routing.local_alphabet(i)))
            .collect();
        for &id in ids.iter() {
            let event = self.global_alphabet().symbol(id);
            let outputs: Vec<OutputValue> = self
                .components
                .iter()
                .zip(&locals)
                .map(|(component, local)| component.evaluate(local))
                .collect::<Result<_>>()?;
            for (i, local) in locals.iter_mut().enumerate() {
                let emitted = self.routing.route(i, event, &outputs)?;
                *local = local.concat(&emitted)?;
            }
        }
        Ok(locals)
    }

    /// The output tuple after `s`: component `i` evaluated on its local
    /// sequence. Computed incrementally, one snapshot per global event.
    pub fn evaluate(&self, s: &EventSequence) -> Result<OutputValue> {
        let ids = s.ids_in(self.global_alphabet())?;
        let mut parts: Vec<Config> = self
            .components
            .iter()
            .map(|c| c.initial_config())
            .collect();
        for &id in ids.iter() {
            parts = match self.step_parts(&parts, id)? {
                Config::Parts(next) => next,
                _ => unreachable!("composite configurations are tuples"),
            };
        }
        self.parts_output(&parts)
    }

    /// Advances every component by one global event against the shared
    /// pre-step output snapshot.
    pub(crate) fn step_parts(&self, parts: &[Config], event: u32) -> Result<Config> {
        let symbol = self.global_alphabet().symbol(event);
        let outputs: Vec<OutputValue> = self
            .components
            .iter()
            .zip(parts)
            .map(|(component, config)| component.config_output(config))
            .collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(parts.len());
        for (i, (component, config)) in self.components.iter().zip(parts).enumerate() {
            let mut advanced = config.clone();
            for &local_event in self.routing.route_ids(i, symbol, &outputs)? {
                advanced = component.step_config(&advanced, local_event)?;
            }
            next.push(advanced);
        }
        Ok(Config::Parts(next))
    }

    pub(crate) fn parts_output(&self, parts: &[Config]) -> Result<OutputValue> {
        let outputs: Vec<OutputValue> = self
            .components
            .iter()
            .zip(parts)
            .map(|(component, config)| component.config_output(config))
            .collect::<Result<_>>()?;
        Ok(OutputValue::Tuple(outputs))
    }
}

/// Two counters mod `k` in series: the first counts units; the second
/// advances exactly when the first is about to roll over; `reset`
/// broadcasts to both. The pair `(n, m)` read together counts
/// `(n + m*k) mod k^2`.
pub fn series_counters(k: i64) -> Result<Composite> {
    if k < 2 {
        return Err(Error::InvalidModulus { value: k, min: 2 });
    }
    let tick = Alphabet::new(["increment", "reset"])?;
    let units = SequenceFunction::counter_in(k, tick.clone())?;
    let carries = SequenceFunction::counter_in(k, tick.clone())?;
    let routing = RoutingSpec::new(
        tick.clone(),
        vec![tick.clone(), tick],
        vec![
            vec![
                GuardedRule::new(Guard::event_is("increment"), ["increment"]),
                GuardedRule::new(Guard::event_is("reset"), ["reset"]),
            ],
            vec![
                GuardedRule::new(Guard::event_is("reset"), ["reset"]),
                GuardedRule::new(
                    Guard::and([Guard::event_is("increment"), Guard::slot_is(0, k - 1)]),
                    ["increment"],
                ),
            ],
        ],
    )?;
    Composite::new(vec![units, carries], routing)
}
