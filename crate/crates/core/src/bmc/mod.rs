//! Bounded explicit-state exploration of all input sequences up to K cycles.
//!
//! Exploration is breadth-first by cycle with states deduplicated across
//! layers. Within a layer, states are expanded in the order they were first
//! reached and inputs are tried in enumeration order, so the first violation
//! found for an assertion is the lexicographically smallest among the shortest
//! violating input sequences.

pub mod case;
pub mod render;

use std::collections::HashSet;

use thiserror::Error;

use crate::plc::{lower_with, run_trace, step_cycle, CycleAutomaton, InputOrder, LowerError, Trace, Value};
use crate::st::{Expr, TypedProgram, ValueType};

pub use case::{parse_case, CaseError, CaseFile, Unwind};
pub use render::{render_counterexample, NotViolated};

pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// Everything needed to run one bounded check.
#[derive(Debug, Clone)]
pub struct VerificationCase {
    pub program: TypedProgram,
    pub entry: String,
    pub t_cycle: i64,
    pub bound: usize,
    pub assumptions: Vec<Expr>,
    pub order: InputOrder,
}

impl VerificationCase {
    pub fn lower(&self) -> Result<CycleAutomaton, LowerError> {
        lower_with(&self.program, &self.entry, self.t_cycle, &self.assumptions, self.order)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Satisfied { bound: usize },
    Violated { cycle: usize },
}

/// Concrete input sequence reaching a violation, replayed into a full trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub assertion: usize,
    /// Input rows ordered as the automaton's `cycle_vars`, one per cycle.
    pub inputs: Vec<Vec<Value>>,
    pub trace: Trace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub assertion: String,
    pub status: Status,
    pub counterexample: Option<Counterexample>,
}

impl Verdict {
    pub fn violated(&self) -> bool {
        matches!(self.status, Status::Violated { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub verdicts: Vec<Verdict>,
    /// Cycle at which assumptions pruned every remaining state.
    pub vacuous_from: Option<usize>,
    /// Successor states generated.
    pub explored: u64,
    pub distinct_states: usize,
}

impl Outcome {
    pub fn all_satisfied(&self) -> bool {
        !self.verdicts.iter().any(Verdict::violated)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Lower(#[from] LowerError),
    #[error("the model has no assertions")]
    NoAssertions,
    #[error("unwinding bound must be at least 1")]
    ZeroBound,
    #[error("cycle time must be positive")]
    ZeroCycleTime,
    #[error("input `{0}` has no RANGE pragma; its domain is too large to enumerate")]
    UnboundedDomain(String),
    #[error("exploration exceeds the budget of {budget} states")]
    BudgetExceeded { budget: u64 },
}

/// Lowers and explores `case`.
pub fn verify(case: &VerificationCase, budget: u64) -> Result<Outcome, VerifyError> {
    if case.t_cycle <= 0 {
        return Err(VerifyError::ZeroCycleTime);
    }
    let a = case.lower()?;
    explore(&a, case.bound, budget)
}

/// Verifies `mutated` under the same settings as `case`.
pub fn verify_mutant_sensitivity(
    case: &VerificationCase,
    mutated: TypedProgram,
    budget: u64,
) -> Result<Outcome, VerifyError> {
    let mutant = VerificationCase {
        program: mutated,
        ..case.clone()
    };
    verify(&mutant, budget)
}

/// Mixed-radix decoding of per-cycle input choices; the first input is the
/// most significant digit and every digit counts up from the domain minimum.
#[derive(Debug, Clone)]
pub struct InputSpace {
    /// (lowest value, number of values, is boolean) per cycle variable.
    digits: Vec<(i64, u64, bool)>,
    pub size: u64,
}

impl InputSpace {
    pub fn new(a: &CycleAutomaton) -> Result<InputSpace, VerifyError> {
        let mut digits = Vec::new();
        let mut size: u64 = 1;
        for &slot in &a.cycle_vars {
            let s = &a.slots[slot];
            let digit = match s.ty {
                ValueType::Bool => (0, 2, true),
                _ => match s.domain {
                    Some(d) if d.explicit => (d.lo, d.size(), false),
                    _ => return Err(VerifyError::UnboundedDomain(s.name.clone())),
                },
            };
            size = size.saturating_mul(digit.1);
            digits.push(digit);
        }
        Ok(InputSpace { digits, size })
    }

    pub fn decode(&self, mut index: u64) -> Vec<Value> {
        let mut out = vec![Value::Bool(false); self.digits.len()];
        for (i, &(lo, n, boolean)) in self.digits.iter().enumerate().rev() {
            let d = index % n;
            index /= n;
            out[i] = if boolean {
                Value::Bool(d == 1)
            } else {
                Value::Int(lo + d as i64)
            };
        }
        out
    }
}

struct Node {
    parent: usize,
    choice: u64,
}

const ROOT: usize = usize::MAX;

/// Explores every input sequence of length up to `bound`.
pub fn explore(a: &CycleAutomaton, bound: usize, budget: u64) -> Result<Outcome, VerifyError> {
    if a.assertions.is_empty() {
        return Err(VerifyError::NoAssertions);
    }
    if bound == 0 {
        return Err(VerifyError::ZeroBound);
    }
    let space = InputSpace::new(a)?;
    if space.size > budget {
        return Err(VerifyError::BudgetExceeded { budget });
    }
    let choices: Vec<Vec<Value>> = (0..space.size).map(|i| space.decode(i)).collect();

    let mut nodes: Vec<Node> = Vec::new();
    let initial = a.initial_values();
    let mut seen: HashSet<Vec<Value>> = HashSet::new();
    seen.insert(initial.clone());
    let mut frontier: Vec<(usize, Vec<Value>)> = vec![(ROOT, initial)];
    // (node of the state before the violating cycle, choice, cycle)
    let mut found: Vec<Option<(usize, u64, usize)>> = vec![None; a.assertions.len()];
    let mut remaining = a.assertions.len();
    let mut explored: u64 = 0;
    let mut vacuous_from = None;

    for depth in 1..=bound {
        let mut next = Vec::new();
        let mut survived = false;
        for (node, values) in &frontier {
            for (c, inputs) in choices.iter().enumerate() {
                explored += 1;
                if explored > budget {
                    return Err(VerifyError::BudgetExceeded { budget });
                }
                let out = step_cycle(a, values, inputs);
                for id in out.counted_violations() {
                    if found[id].is_none() {
                        found[id] = Some((*node, c as u64, depth));
                        remaining -= 1;
                    }
                }
                if out.pruned() {
                    continue;
                }
                survived = true;
                if seen.insert(out.values.clone()) {
                    nodes.push(Node {
                        parent: *node,
                        choice: c as u64,
                    });
                    next.push((nodes.len() - 1, out.values));
                }
            }
        }
        if !survived {
            vacuous_from = Some(depth);
            break;
        }
        if remaining == 0 || next.is_empty() {
            break;
        }
        frontier = next;
    }

    let verdicts = a
        .assertions
        .iter()
        .enumerate()
        .map(|(id, assertion)| match found[id] {
            None => Verdict {
                assertion: assertion.name.clone(),
                status: Status::Satisfied { bound },
                counterexample: None,
            },
            Some((node, choice, cycle)) => {
                let mut path = vec![choice];
                let mut n = node;
                while n != ROOT {
                    path.push(nodes[n].choice);
                    n = nodes[n].parent;
                }
                path.reverse();
                let inputs: Vec<Vec<Value>> = path.iter().map(|&c| choices[c as usize].clone()).collect();
                let trace = run_trace(a, &inputs);
                debug_assert_eq!(trace.first_violation(id), Some(cycle));
                Verdict {
                    assertion: assertion.name.clone(),
                    status: Status::Violated { cycle },
                    counterexample: Some(Counterexample {
                        assertion: id,
                        inputs,
                        trace,
                    }),
                }
            }
        })
        .collect();
    Ok(Outcome {
        verdicts,
        vacuous_from,
        explored,
        distinct_states: seen.len(),
    })
}
