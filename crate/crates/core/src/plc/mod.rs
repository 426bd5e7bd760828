//! Scan-cycle semantics: lowering to a control-flow automaton, built-in
//! function blocks and a concrete simulator.

pub mod builtins;
pub mod cfa;
pub mod sim;

use std::fmt;

pub use builtins::{ctud_step, ton_step, CtudInputs, CtudState, TonState};
pub use cfa::{
    lower_to_cfa, lower_with, Action, Assertion, CycleAutomaton, Edge, InputOrder, LocKind, Location, LowerError,
    RExpr, Slot, SlotId, TimerInstance,
};
pub use sim::{eval, run_named, run_trace, step_cycle, CycleOutcome, CycleState, Event, SimError, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    /// INT values and TIME values in milliseconds.
    Int(i64),
}

impl Value {
    pub fn as_bool(self) -> bool {
        match self {
            Value::Bool(b) => b,
            Value::Int(i) => i != 0,
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Value::Bool(b) => b as i64,
            Value::Int(i) => i,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("TRUE"),
            Value::Bool(false) => f.write_str("FALSE"),
            Value::Int(i) => write!(f, "{i}"),
        }
    }
}
