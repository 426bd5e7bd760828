//! State-machine requirements: parsing, exhaustive determinism and
//! completeness checks, and monitor generation.
//!
//! ```text
//! state Mode_1
//! state Mode_2
//! init Mode_1
//! trans Mode_1 -> Mode_2 when Request_Mode_2
//! trans Mode_1 -> Mode_1 when NOT Request_Mode_2
//! ```

use std::fmt::Write;

use super::{input_names, Monitor, RequirementError};
use crate::plc::{cfa::to_rexpr, eval, LowerError, RExpr, Value};
use crate::st::printer::{ident, print_expr};
use crate::st::{parse_expr_at, type_of, Expr, ExprError, Span, ValueType};

/// Guards may mention at most this many inputs (2^16 valuations).
pub const MAX_INPUTS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub src: String,
    pub guard: Expr,
    pub dst: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateMachineSpec {
    pub states: Vec<String>,
    pub initial: String,
    pub transitions: Vec<Transition>,
}

/// Two transitions of `state` enabled by the same valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub state: String,
    pub first: usize,
    pub second: usize,
    pub witness: Vec<(String, bool)>,
}

/// Valuations under which no transition of `state` is enabled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gap {
    pub state: String,
    /// First such valuation in enumeration order.
    pub witness: Vec<(String, bool)>,
    pub count: u64,
}

pub fn parse_state_machine(text: &str) -> Result<StateMachineSpec, RequirementError> {
    let mut states: Vec<String> = Vec::new();
    let mut initial = None;
    let mut transitions = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| RequirementError::Syntax { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, rest) = trimmed
            .split_once(char::is_whitespace)
            .map(|(k, r)| (k, r.trim()))
            .unwrap_or((trimmed, ""));
        match key {
            "state" => {
                if rest.is_empty() || rest.contains(char::is_whitespace) {
                    return Err(err("expected `state <name>`".into()));
                }
                if states.iter().any(|s| s == rest) {
                    return Err(err(format!("state `{rest}` declared twice")));
                }
                states.push(rest.to_string());
            }
            "init" => initial = Some((rest.to_string(), line)),
            "trans" => {
                let (head, guard) = rest
                    .split_once(" when ")
                    .ok_or_else(|| err("expected `trans A -> B when <guard>`".into()))?;
                let (src, dst) = head.split_once("->").ok_or_else(|| err("expected `A -> B`".into()))?;
                let guard_text = guard.trim();
                let col = raw.rfind(guard_text).unwrap_or(0) + 1;
                let guard = parse_expr_at(guard_text, Span::new(line as u32, col as u32))
                    .map_err(|e| err(format!("guard: {e}")))?;
                let ty = type_of(&guard, &|v| {
                    if v.parts.len() == 1 {
                        Ok(ValueType::Bool)
                    } else {
                        Err(ExprError::Unresolved(v.to_string()))
                    }
                })
                .map_err(|e| err(format!("guard: {e}")))?;
                if ty != ValueType::Bool {
                    return Err(err(format!("guard has type {ty}")));
                }
                transitions.push((src.trim().to_string(), guard, dst.trim().to_string(), line));
            }
            other => return Err(err(format!("unknown keyword `{other}`"))),
        }
    }
    let (initial, init_line) = initial.ok_or(RequirementError::Syntax {
        line: 0,
        message: "missing `init` line".into(),
    })?;
    let known = |s: &str, line: usize| {
        if states.iter().any(|x| x == s) {
            Ok(())
        } else {
            Err(RequirementError::Syntax {
                line,
                message: format!("unknown state `{s}`"),
            })
        }
    };
    known(&initial, init_line)?;
    let mut out = Vec::new();
    for (src, guard, dst, line) in transitions {
        known(&src, line)?;
        known(&dst, line)?;
        out.push(Transition { src, guard, dst });
    }
    Ok(StateMachineSpec {
        states,
        initial,
        transitions: out,
    })
}

impl StateMachineSpec {
    /// Guard inputs in order of first appearance.
    pub fn inputs(&self) -> Vec<String> {
        let guards: Vec<&Expr> = self.transitions.iter().map(|t| &t.guard).collect();
        input_names(&guards)
    }

    fn compiled_guards(&self, inputs: &[String]) -> Vec<RExpr> {
        self.transitions
            .iter()
            .map(|t| {
                to_rexpr(&t.guard, &mut |v| {
                    let name = v.to_string();
                    inputs
                        .iter()
                        .position(|i| *i == name)
                        .ok_or(LowerError::Unresolved(name))
                })
                .expect("guard inputs are collected from the guards")
            })
            .collect()
    }
}

/// Valuation `index` over `n` inputs; the first input is the most significant bit.
fn valuation(index: u64, n: usize) -> Vec<Value> {
    (0..n).map(|i| Value::Bool(index >> (n - 1 - i) & 1 == 1)).collect()
}

fn witness(inputs: &[String], values: &[Value]) -> Vec<(String, bool)> {
    inputs
        .iter()
        .zip(values)
        .map(|(n, v)| (n.clone(), v.as_bool()))
        .collect()
}

fn checked_inputs(s: &StateMachineSpec) -> Result<Vec<String>, RequirementError> {
    let inputs = s.inputs();
    if inputs.len() > MAX_INPUTS {
        return Err(RequirementError::TooManyInputs {
            count: inputs.len(),
            limit: MAX_INPUTS,
        });
    }
    Ok(inputs)
}

/// Every pair of transitions leaving the same state that some valuation enables together.
pub fn check_sm_determinism(s: &StateMachineSpec) -> Result<Vec<Conflict>, RequirementError> {
    let inputs = checked_inputs(s)?;
    let guards = s.compiled_guards(&inputs);
    let mut conflicts = Vec::new();
    for state in &s.states {
        let outgoing: Vec<usize> = (0..s.transitions.len())
            .filter(|&t| s.transitions[t].src == *state)
            .collect();
        for (k, &a) in outgoing.iter().enumerate() {
            for &b in &outgoing[k + 1..] {
                let hit = (0..1u64 << inputs.len())
                    .map(|i| valuation(i, inputs.len()))
                    .find(|v| eval(&guards[a], v).as_bool() && eval(&guards[b], v).as_bool());
                if let Some(v) = hit {
                    conflicts.push(Conflict {
                        state: state.clone(),
                        first: a,
                        second: b,
                        witness: witness(&inputs, &v),
                    });
                }
            }
        }
    }
    Ok(conflicts)
}

/// Every state with valuations that enable none of its transitions.
pub fn check_sm_completeness(s: &StateMachineSpec) -> Result<Vec<Gap>, RequirementError> {
    let inputs = checked_inputs(s)?;
    let guards = s.compiled_guards(&inputs);
    let mut gaps = Vec::new();
    for state in &s.states {
        let outgoing: Vec<usize> = (0..s.transitions.len())
            .filter(|&t| s.transitions[t].src == *state)
            .collect();
        let mut first = None;
        let mut count = 0;
        for i in 0..1u64 << inputs.len() {
            let v = valuation(i, inputs.len());
            if !outgoing.iter().any(|&t| eval(&guards[t], &v).as_bool()) {
                count += 1;
                first.get_or_insert(v);
            }
        }
        if let Some(v) = first {
            gaps.push(Gap {
                state: state.clone(),
                witness: witness(&inputs, &v),
                count,
            });
        }
    }
    Ok(gaps)
}

/// Monitor block tracking the expected state in an INT output `state`, where
/// state `k` is `s.states[k]`. With `require_well_formed`, nondeterministic or
/// incomplete machines are rejected; otherwise the first listed enabled
/// transition wins and a state without an enabled transition is kept.
pub fn compile_state_machine(
    s: &StateMachineSpec,
    block: &str,
    require_well_formed: bool,
) -> Result<Monitor, RequirementError> {
    if require_well_formed {
        let conflicts = check_sm_determinism(s)?;
        if !conflicts.is_empty() {
            return Err(RequirementError::NondeterministicSpec(conflicts.len()));
        }
        let gaps = check_sm_completeness(s)?;
        if !gaps.is_empty() {
            return Err(RequirementError::IncompleteSpec(gaps.len()));
        }
    }
    let inputs = checked_inputs(s)?;
    let index = |name: &str| s.states.iter().position(|x| x == name).expect("known state");
    let mut out = String::new();
    writeln!(out, "FUNCTION_BLOCK {}", ident(block)).unwrap();
    if !inputs.is_empty() {
        out.push_str("    VAR_INPUT\n");
        for i in &inputs {
            writeln!(out, "        {} : BOOL;", ident(i)).unwrap();
        }
        out.push_str("    END_VAR\n");
    }
    writeln!(
        out,
        "    VAR_OUTPUT\n        state : INT := {};\n    END_VAR",
        index(&s.initial)
    )
    .unwrap();
    writeln!(out, "    //#RANGE(state, 0, {})", s.states.len() - 1).unwrap();
    out.push_str("BEGIN\n");
    let mut first_branch = true;
    for (k, state) in s.states.iter().enumerate() {
        let outgoing: Vec<&Transition> = s.transitions.iter().filter(|t| t.src == *state).collect();
        if outgoing.is_empty() {
            continue;
        }
        let head = if first_branch { "IF" } else { "ELSIF" };
        first_branch = false;
        writeln!(out, "    {head} state = {k} THEN").unwrap();
        for (j, t) in outgoing.iter().enumerate() {
            let kw = if j == 0 { "IF" } else { "ELSIF" };
            writeln!(out, "        {kw} {} THEN", print_expr(&t.guard)).unwrap();
            writeln!(out, "            state := {};", index(&t.dst)).unwrap();
        }
        out.push_str("        END_IF;\n");
    }
    if !first_branch {
        out.push_str("    END_IF;\n");
    }
    out.push_str("END_FUNCTION_BLOCK\n");
    Ok(Monitor {
        block: block.to_string(),
        source: out,
        inputs,
        outputs: vec!["state".into()],
    })
}
