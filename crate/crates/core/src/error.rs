use crate::value::OutputValue;
use thiserror::Error;

/// Errors shared by construction, evaluation, and checking.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("an alphabet must contain at least one event")]
    EmptyAlphabet,

    #[error("duplicate event symbol {0:?}")]
    DuplicateEvent(String),

    #[error("event {symbol:?} at position {position} is not in the alphabet")]
    ForeignEvent { symbol: String, position: usize },

    #[error("alphabets differ: expected {{{expected}}}, got {{{actual}}}")]
    AlphabetMismatch { expected: String, actual: String },

    #[error("modulus must be at least {min}, got {value}")]
    InvalidModulus { value: i64, min: i64 },

    #[error("modulus {0} exceeds the supported maximum of 1000000")]
    ModulusTooLarge(i64),

    #[error("a counter alphabet must contain the {0:?} event")]
    MissingCounterEvent(&'static str),

    #[error("initial value {0} is not in the declared domain")]
    InitOutsideDomain(OutputValue),

    #[error("step table has no entry for event {event:?} and value {value}")]
    StepIncomplete { event: String, value: OutputValue },

    #[error("step entry for event {event:?} and value {value} is outside the domain")]
    StepOutsideDomain { event: String, value: OutputValue },

    #[error("step table produces {produced}, which is outside the domain")]
    StepEscapesDomain { produced: OutputValue },

    #[error("output map has no entry for domain value {0}")]
    MapIncomplete(OutputValue),

    #[error("no output-map entry or rule matches {0}")]
    UnmappedValue(OutputValue),

    #[error("a table-form output map cannot cover an unbounded domain; use rules")]
    MapNeedsRules,

    #[error("a parallel composition needs at least one part")]
    EmptyParallel,

    #[error("component count mismatch: routing declares {expected}, got {actual}")]
    ComponentCountMismatch { expected: usize, actual: usize },

    #[error("guard references output slot {slot}, but there are only {count} slots")]
    SlotOutOfRange { slot: usize, count: usize },

    #[error("cannot project index {index} out of the slot-{slot} output {value}")]
    BadProjection {
        slot: usize,
        index: usize,
        value: OutputValue,
    },

    #[error("ordering comparisons need integer operands, got {0}")]
    OrderedComparisonOnNonInteger(OutputValue),

    #[error("rule for component {component} emits {symbol:?}, which is not in its local alphabet")]
    EmissionOutsideAlphabet { component: usize, symbol: String },

    #[error("guard compares the event to {symbol:?}, which is not in the global alphabet")]
    GuardEventUnknown { symbol: String },

    #[error("expected an output tuple of arity {expected}, got arity {actual}")]
    ArityMismatch { expected: usize, actual: usize },

    #[error("the function has an unbounded output domain and no finite state machine")]
    UnboundedDomain,

    #[error("state bound of {limit} exceeded")]
    BoundExceeded { limit: usize },

    #[error("counter value overflowed")]
    CounterOverflow,

    #[error("a machine needs at least one state")]
    NoStates,

    #[error("state index {0} is out of range")]
    StateOutOfRange(usize),

    #[error("the transition table must cover every state and event exactly once")]
    DeltaIncomplete,

    #[error("output {0} is not in the declared output set")]
    OutputOutsideSet(OutputValue),

    #[error("a mutual-exclusion model needs at least two processes, got {0}")]
    TooFewProcesses(usize),

    #[error("semantic dependency probing needs finite component output domains")]
    DomainNotEnumerable,
}

pub type Result<T> = std::result::Result<T, Error>;
