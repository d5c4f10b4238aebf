//! State variables as functions of event sequences.
//!
//! A system's state can be described by a family of variables, each a
//! function from finite event sequences to values: the variable's value
//! after history `s` is what the function returns on `s`. This crate
//! builds such functions from a small set of forms —
//!
//! * primitive recursion: an initial value plus a step rule applied once
//!   per event ([`PrimRecDef`], [`SequenceFunction::counter`]);
//! * output maps that hide state ([`SequenceFunction::mapped`]);
//! * parallel tuples over one alphabet ([`SequenceFunction::parallel`]);
//! * routed composites, where guarded rules turn each global event plus
//!   the current component outputs into per-component local events
//!   ([`Composite`], [`RoutingSpec`]);
//!
//! — and connects them to explicit Moore machines: [`compile`] builds the
//! reachable machine of a finitely presented function, [`product`] forms
//! the routed product of component machines, and [`check_equivalent`] /
//! [`check_implements`] decide agreement with shortlex-minimal witnesses.
//! The [`analysis`] module adds dependency and cascade detection for
//! composites and breadth-first safety-invariant checking, including a
//! small mutual-exclusion model.
//!
//! ```
//! use seqfn::{compile, check_equivalent, EventSequence, SequenceFunction};
//! use seqfn::compose::series_counters;
//!
//! // Two mod-10 counters in series count to 100.
//! let series: SequenceFunction = series_counters(10).unwrap().into();
//! let s = EventSequence::from_symbols(series.alphabet(), vec!["increment"; 23]).unwrap();
//! assert_eq!(series.evaluate(&s).unwrap().to_string(), "(3, 2)");
//!
//! // The compiled composite is one machine with 100 states.
//! let machine = compile(&series, 1000).unwrap();
//! assert_eq!(machine.state_count(), 100);
//! ```
//!
//! Everything is immutable after construction and every operation is
//! pure, so values can be shared and sent between threads freely.

pub mod alphabet;
pub mod analysis;
pub mod compose;
pub mod error;
pub mod function;
pub mod machine;
pub mod value;

pub use alphabet::{Alphabet, EventSequence};
pub use compose::{Composite, Guard, GuardedRule, RoutingSpec};
pub use error::{Error, Result};
pub use function::{Evaluator, MapRule, OutputMap, PrimRecDef, SequenceFunction, ValueTest};
pub use machine::{
    check_equivalent, check_implements, compile, find_cycle, product, MooreMachine, Verdict,
    DEFAULT_IMPLEMENTS_DEPTH, DEFAULT_MAX_STATES,
};
pub use value::{compare_values, CmpOp, OutputDomain, OutputValue};
