//! Command-line driver: reads one model document, runs one operation,
//! prints a JSON report on standard output, and exits with a stable code.
//!
//! Exit codes: 0 for a value or a passing check, 1 for a failing check or
//! a cycle found by a checking command, 2 for usage and definition
//! errors, 3 for an exceeded state bound.

pub mod document;

use clap::{Args, Parser, Subcommand};
use document::{value_to_json, DocError, Registry};
use seqfn::analysis::{
    cascade_order, check_invariant, reachable, Cascade, InvariantVerdict, Predicate,
};
use seqfn::{
    check_equivalent, check_implements, compile, find_cycle, product, Alphabet, Composite,
    Error as CoreError, EventSequence, MooreMachine, Verdict, DEFAULT_IMPLEMENTS_DEPTH,
    DEFAULT_MAX_STATES,
};
use serde_json::{json, Value};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "seqfn",
    about = "Evaluate, compose, compile, and check event-sequence state machines",
    version
)]
pub struct Cli {
    /// Model document (JSON) defining the named objects commands refer to.
    #[arg(long, value_name = "FILE")]
    pub doc: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InputArg {
    /// Whitespace-separated event names; `event*N` repeats an event N times.
    #[arg(long)]
    pub input: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a function on an event sequence.
    Eval {
        name: String,
        #[command(flatten)]
        input: InputArg,
    },
    /// Evaluate a function on every prefix of an event sequence.
    Trace {
        name: String,
        #[command(flatten)]
        input: InputArg,
    },
    /// Compile a function to an explicit machine.
    Compile {
        name: String,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        /// Write the machine's transition graph in DOT form to a file.
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
    },
    /// Build the routed product of a composite's compiled components.
    Product {
        composite: String,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Check two machines for equivalence.
    Equiv { a: String, b: String },
    /// Check that a machine implements a function.
    Implements {
        machine: String,
        function: String,
        #[arg(long, default_value_t = DEFAULT_IMPLEMENTS_DEPTH)]
        depth: usize,
    },
    /// Order a composite's components by information flow, or report a cycle.
    Cascade { composite: String },
    /// Find a state cycle in a machine.
    Cycle { machine: String },
    /// Count and list the reachable states of a machine.
    Reach {
        machine: String,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Check a safety predicate at every reachable state of a machine.
    Invariant {
        machine: String,
        predicate: String,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
    },
}

/// One report: the JSON printed on standard output plus the exit code.
#[derive(Debug, PartialEq, Eq)]
pub struct Report {
    pub json: Value,
    pub exit: i32,
}

impl Report {
    fn value(json: Value) -> Self {
        Report { json, exit: 0 }
    }

    fn error(message: impl ToString) -> Self {
        Report {
            json: json!({ "verdict": "error", "message": message.to_string() }),
            exit: 2,
        }
    }

    fn from_core_error(error: CoreError) -> Self {
        match error {
            CoreError::BoundExceeded { limit } => Report {
                json: json!({ "verdict": "bound-exceeded", "limit": limit }),
                exit: 3,
            },
            other => Report::error(other),
        }
    }
}

/// Expands `event*N` tokens and validates the sequence against `alphabet`.
pub fn parse_sequence(alphabet: &Alphabet, text: &str) -> Result<EventSequence, CoreError> {
    let mut symbols: Vec<&str> = Vec::new();
    for token in text.split_whitespace() {
        match token.rsplit_once('*') {
            Some((event, count)) if count.parse::<usize>().is_ok() => {
                let count: usize = count.parse().unwrap();
                symbols.extend(std::iter::repeat_n(event, count));
            }
            _ => symbols.push(token),
        }
    }
    EventSequence::from_symbols(alphabet, symbols)
}

fn lookup<'a, T>(
    section: &'a indexmap::IndexMap<String, T>,
    name: &str,
    what: &str,
) -> Result<&'a T, Report> {
    section
        .get(name)
        .ok_or_else(|| Report::error(format!("no {what} named {name:?}")))
}

/// A machine by name: either declared in the document's machines section
/// or a function name, compiled on the fly within `max_states`.
fn resolve_machine(
    registry: &Registry,
    name: &str,
    max_states: usize,
) -> Result<MooreMachine, Report> {
    if let Some(machine) = registry.machines.get(name) {
        return Ok(machine.clone());
    }
    match registry.functions.get(name) {
        Some(function) => compile(function, max_states).map_err(Report::from_core_error),
        None => Err(Report::error(format!(
            "no machine or function named {name:?}"
        ))),
    }
}

fn resolve_composite<'a>(registry: &'a Registry, name: &str) -> Result<&'a Composite, Report> {
    let function = lookup(&registry.functions, name, "function")?;
    function
        .as_composite()
        .ok_or_else(|| Report::error(format!("{name:?} is not a composite")))
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

fn equivalence_report(verdict: Verdict) -> Report {
    match verdict {
        Verdict::Pass => Report::value(json!({ "verdict": "pass" })),
        Verdict::Fail {
            witness,
            expected,
            actual,
        } => Report {
            json: json!({
                "verdict": "fail",
                "witness": witness.to_string(),
                "expected": value_to_json(&expected),
                "actual": value_to_json(&actual),
            }),
            exit: 1,
        },
        Verdict::CycleWitness { .. } => unreachable!("equivalence checks do not report cycles"),
        Verdict::BoundExceeded { limit } => Report {
            json: json!({ "verdict": "bound-exceeded", "limit": limit }),
            exit: 3,
        },
    }
}

/// Runs one command against a parsed registry.
pub fn execute(registry: &Registry, command: &Command) -> Report {
    match run(registry, command) {
        Ok(report) => report,
        Err(report) => report,
    }
}

fn run(registry: &Registry, command: &Command) -> Result<Report, Report> {
    match command {
        Command::Eval { name, input } => {
            let function = lookup(&registry.functions, name, "function")?;
            let s = parse_sequence(function.alphabet(), &input.input)
                .map_err(Report::from_core_error)?;
            let value = function.evaluate(&s).map_err(Report::from_core_error)?;
            Ok(Report::value(json!({ "value": value_to_json(&value) })))
        }
        Command::Trace { name, input } => {
            let function = lookup(&registry.functions, name, "function")?;
            let s = parse_sequence(function.alphabet(), &input.input)
                .map_err(Report::from_core_error)?;
            let outputs = function.trace(&s).map_err(Report::from_core_error)?;
            Ok(Report::value(json!({
                "value": outputs.iter().map(value_to_json).collect::<Vec<_>>(),
            })))
        }
        Command::Compile {
            name,
            max_states,
            dot,
        } => {
            let function = lookup(&registry.functions, name, "function")?;
            let machine = compile(function, *max_states).map_err(Report::from_core_error)?;
            if let Some(file) = dot {
                std::fs::write(file, machine.to_dot())
                    .map_err(|e| Report::error(format!("cannot write {}: {e}", file.display())))?;
            }
            Ok(Report::value(json!({
                "verdict": "ok",
                "count": machine.state_count(),
            })))
        }
        Command::Product {
            composite,
            max_states,
        } => {
            let comp = resolve_composite(registry, composite)?;
            let machines = comp
                .components()
                .iter()
                .map(|c| compile(c, *max_states))
                .collect::<Result<Vec<_>, _>>()
                .map_err(Report::from_core_error)?;
            let machine = product(&machines, comp.routing(), *max_states)
                .map_err(Report::from_core_error)?;
            Ok(Report::value(json!({
                "verdict": "ok",
                "count": machine.state_count(),
            })))
        }
        Command::Equiv { a, b } => {
            let left = resolve_machine(registry, a, DEFAULT_MAX_STATES)?;
            let right = resolve_machine(registry, b, DEFAULT_MAX_STATES)?;
            let verdict = check_equivalent(&left, &right).map_err(Report::from_core_error)?;
            Ok(equivalence_report(verdict))
        }
        Command::Implements {
            machine,
            function,
            depth,
        } => {
            let m = resolve_machine(registry, machine, DEFAULT_MAX_STATES)?;
            let f = lookup(&registry.functions, function, "function")?;
            let verdict = check_implements(&m, f, *depth).map_err(Report::from_core_error)?;
            Ok(equivalence_report(verdict))
        }
        Command::Cascade { composite } => {
            let comp = resolve_composite(registry, composite)?;
            Ok(match cascade_order(comp) {
                Cascade::Order(order) => Report::value(json!({
                    "verdict": "cascade",
                    "order": one_based(&order),
                })),
                Cascade::Cycle(cycle) => Report {
                    json: json!({
                        "verdict": "cycle",
                        "witness": one_based(&cycle),
                    }),
                    exit: 1,
                },
            })
        }
        Command::Cycle { machine } => {
            let m = resolve_machine(registry, machine, DEFAULT_MAX_STATES)?;
            Ok(match find_cycle(&m) {
                Verdict::CycleWitness { states, events } => Report {
                    json: json!({
                        "verdict": "cycle",
                        "states": states,
                        "events": events.to_string(),
                    }),
                    exit: 1,
                },
                Verdict::Pass => Report::value(json!({ "verdict": "pass" })),
                other => unreachable!("find_cycle returns Pass or CycleWitness: {other:?}"),
            })
        }
        Command::Reach {
            machine,
            max_states,
        } => {
            let m = resolve_machine(registry, machine, *max_states)?;
            let states = reachable(&m, *max_states).map_err(Report::from_core_error)?;
            Ok(Report::value(json!({
                "count": states.len(),
                "states": states,
            })))
        }
        Command::Invariant {
            machine,
            predicate,
            max_states,
        } => {
            let m = resolve_machine(registry, machine, *max_states)?;
            let p: &Predicate = lookup(&registry.predicates, predicate, "predicate")?;
            let verdict =
                check_invariant(&m, p, *max_states).map_err(Report::from_core_error)?;
            Ok(match verdict {
                InvariantVerdict::Pass => Report::value(json!({ "verdict": "pass" })),
                InvariantVerdict::Fail { trace, output } => Report {
                    json: json!({
                        "verdict": "fail",
                        "witness": trace.to_string(),
                        "output": value_to_json(&output),
                    }),
                    exit: 1,
                },
            })
        }
    }
}

/// Full driver: parse arguments, load the document, run, print, exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                let report = Report::error(e.to_string().lines().next().unwrap_or("usage error"));
                println!("{}", report.json);
                eprintln!("{e}");
                return 2;
            }
            print!("{e}");
            return 0;
        }
    };
    let text = match std::fs::read_to_string(&cli.doc) {
        Ok(text) => text,
        Err(e) => {
            let report = Report::error(format!("cannot read {}: {e}", cli.doc.display()));
            println!("{}", report.json);
            eprintln!("cannot read {}: {e}", cli.doc.display());
            return 2;
        }
    };
    let registry = match document::parse_document(&text) {
        Ok(registry) => registry,
        Err(e @ DocError { .. }) => {
            let report = Report {
                json: json!({ "verdict": "error", "path": e.path, "message": e.message }),
                exit: 2,
            };
            println!("{}", report.json);
            eprintln!("{}: {}", report.json["path"], report.json["message"]);
            return 2;
        }
    };
    let report = execute(&registry, &cli.command);
    println!("{}", report.json);
    if report.exit == 2 || report.exit == 3 {
        eprintln!("{}", report.json["message"].as_str().unwrap_or("error"));
    }
    report.exit
}
