//! Concrete execution of a cycle automaton.

use std::collections::HashMap;
use std::io;

use thiserror::Error;

use super::builtins::{ctud_step, ton_step, CtudInputs, CtudState, TonState};
use super::cfa::{store, Action, CycleAutomaton, LocKind, RExpr, TimerInstance};
use super::Value;
use crate::st::{BinOp, UnOp, ValueType};

/// Evaluates `e` over slot values. Arithmetic saturates; division by zero yields 0.
pub fn eval(e: &RExpr, values: &[Value]) -> Value {
    match e {
        RExpr::Const(v) => *v,
        RExpr::Slot(s) => values[*s],
        RExpr::Unary(UnOp::Not, inner) => Value::Bool(!eval(inner, values).as_bool()),
        RExpr::Unary(UnOp::Neg, inner) => Value::Int(eval(inner, values).as_int().saturating_neg()),
        RExpr::Binary(op, l, r) => {
            let lv = eval(l, values);
            match op {
                BinOp::And => return Value::Bool(lv.as_bool() && eval(r, values).as_bool()),
                BinOp::Or => return Value::Bool(lv.as_bool() || eval(r, values).as_bool()),
                BinOp::Implies => return Value::Bool(!lv.as_bool() || eval(r, values).as_bool()),
                _ => {}
            }
            let rv = eval(r, values);
            let (a, b) = (lv.as_int(), rv.as_int());
            match op {
                BinOp::Xor => Value::Bool(lv.as_bool() != rv.as_bool()),
                BinOp::Eq => Value::Bool(a == b),
                BinOp::Ne => Value::Bool(a != b),
                BinOp::Lt => Value::Bool(a < b),
                BinOp::Le => Value::Bool(a <= b),
                BinOp::Gt => Value::Bool(a > b),
                BinOp::Ge => Value::Bool(a >= b),
                BinOp::Add => Value::Int(a.saturating_add(b)),
                BinOp::Sub => Value::Int(a.saturating_sub(b)),
                BinOp::Mul => Value::Int(a.saturating_mul(b)),
                BinOp::Div => Value::Int(if b == 0 { 0 } else { a.saturating_div(b) }),
                BinOp::And | BinOp::Or | BinOp::Implies => unreachable!(),
            }
        }
    }
}

/// Pragma outcome observed while executing one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Event {
    AssertionFailed(usize),
    AssumptionFailed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleOutcome {
    pub values: Vec<Value>,
    /// In execution order.
    pub events: Vec<Event>,
}

impl CycleOutcome {
    /// Assertions violated before the first failed assumption of the cycle.
    pub fn counted_violations(&self) -> impl Iterator<Item = usize> + '_ {
        self.events
            .iter()
            .take_while(|e| !matches!(e, Event::AssumptionFailed(_)))
            .map(|e| match e {
                Event::AssertionFailed(i) => *i,
                Event::AssumptionFailed(_) => unreachable!(),
            })
    }

    pub fn pruned(&self) -> bool {
        self.events.iter().any(|e| matches!(e, Event::AssumptionFailed(_)))
    }
}

/// Executes one scan: samples `inputs` (ordered as `cycle_vars`), runs the body
/// and returns the end-of-cycle values.
pub fn step_cycle(a: &CycleAutomaton, values: &[Value], inputs: &[Value]) -> CycleOutcome {
    let mut values = values.to_vec();
    let mut events = Vec::new();
    let mut called = vec![false; a.timers.len()];
    let mut loc = a.initial;
    loop {
        let edge = a
            .outgoing(loc)
            .find(|e| eval(&e.guard, &values).as_bool())
            .expect("guards of a location are exhaustive");
        let mut end = false;
        for action in &edge.actions {
            match action {
                Action::Havoc => {
                    for (&slot, &v) in a.cycle_vars.iter().zip(inputs) {
                        let s = &a.slots[slot];
                        values[slot] = store(s.ty, s.domain, v);
                    }
                }
                Action::Assign(slot, e) => {
                    let v = eval(e, &values);
                    let s = &a.slots[*slot];
                    values[*slot] = store(s.ty, s.domain, v);
                }
                Action::Step(t) => {
                    let elapsed = if called[*t] { 0 } else { a.t_cycle };
                    called[*t] = true;
                    step_timer(&a.timers[*t], &mut values, elapsed);
                }
                Action::EndCycle => end = true,
            }
        }
        loc = edge.dst;
        match a.locations[loc].kind {
            LocKind::AssertionFailed(i) => events.push(Event::AssertionFailed(i)),
            LocKind::AssumptionFailed(i) => events.push(Event::AssumptionFailed(i)),
            _ => {}
        }
        if end {
            return CycleOutcome { values, events };
        }
    }
}

fn step_timer(timer: &TimerInstance, values: &mut [Value], elapsed: i64) {
    match *timer {
        TimerInstance::Ton {
            input,
            preset,
            q,
            et,
            in_prev,
            ..
        } => {
            let state = TonState {
                in_prev: values[in_prev].as_bool(),
                et: values[et].as_int(),
                q: values[q].as_bool(),
            };
            let next = ton_step(state, values[input].as_bool(), values[preset].as_int(), elapsed);
            values[in_prev] = Value::Bool(next.in_prev);
            values[et] = Value::Int(next.et);
            values[q] = Value::Bool(next.q);
        }
        TimerInstance::Ctud {
            cu,
            cd,
            r,
            ld,
            pv,
            qu,
            qd,
            cv,
            cu_prev,
            cd_prev,
            domain,
            ..
        } => {
            let state = CtudState {
                cv: values[cv].as_int(),
                qu: values[qu].as_bool(),
                qd: values[qd].as_bool(),
                cu_prev: values[cu_prev].as_bool(),
                cd_prev: values[cd_prev].as_bool(),
            };
            let inputs = CtudInputs {
                cu: values[cu].as_bool(),
                cd: values[cd].as_bool(),
                r: values[r].as_bool(),
                ld: values[ld].as_bool(),
                pv: values[pv].as_int(),
            };
            let next = ctud_step(state, inputs, domain);
            values[cv] = Value::Int(next.cv);
            values[qu] = Value::Bool(next.qu);
            values[qd] = Value::Bool(next.qd);
            values[cu_prev] = Value::Bool(next.cu_prev);
            values[cd_prev] = Value::Bool(next.cd_prev);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleState {
    /// 1-based.
    pub cycle: usize,
    pub values: Vec<Value>,
}

/// End-of-cycle states of a concrete run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Sampled input values per cycle, ordered as `cycle_vars`.
    pub inputs: Vec<Vec<Value>>,
    pub states: Vec<CycleState>,
    pub events: Vec<Vec<Event>>,
}

impl Trace {
    /// First cycle (1-based) at which assertion `id` fails, ignoring cycles
    /// after an assumption has failed.
    pub fn first_violation(&self, id: usize) -> Option<usize> {
        for (i, events) in self.events.iter().enumerate() {
            for e in events {
                match e {
                    Event::AssumptionFailed(_) => return None,
                    Event::AssertionFailed(a) if *a == id => return Some(i + 1),
                    Event::AssertionFailed(_) => {}
                }
            }
        }
        None
    }

    /// Writes `cycle,<var>...` CSV with one row per cycle, hidden slots omitted.
    pub fn write_csv<W: io::Write>(&self, a: &CycleAutomaton, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let visible: Vec<usize> = (0..a.slots.len()).filter(|&s| !a.slots[s].hidden).collect();
        let mut header = vec!["cycle".to_string()];
        header.extend(visible.iter().map(|&s| a.slots[s].name.clone()));
        w.write_record(&header)?;
        for state in &self.states {
            let mut row = vec![state.cycle.to_string()];
            row.extend(visible.iter().map(|&s| state.values[s].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the automaton from its initial state on positional input rows.
pub fn run_trace(a: &CycleAutomaton, inputs: &[Vec<Value>]) -> Trace {
    let mut values = a.initial_values();
    let mut trace = Trace {
        inputs: Vec::with_capacity(inputs.len()),
        states: Vec::with_capacity(inputs.len()),
        events: Vec::with_capacity(inputs.len()),
    };
    for (i, row) in inputs.iter().enumerate() {
        let out = step_cycle(a, &values, row);
        values = out.values;
        trace.inputs.push(row.clone());
        trace.states.push(CycleState {
            cycle: i + 1,
            values: values.clone(),
        });
        trace.events.push(out.events);
    }
    trace
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("cycle {cycle}: no value for input `{var}`")]
    MissingInput { cycle: usize, var: String },
    #[error("cycle {cycle}: input `{var}` expects {expected}, got `{value}`")]
    BadInput {
        cycle: usize,
        var: String,
        expected: ValueType,
        value: String,
    },
}

/// Runs the automaton on input rows keyed by slot name.
pub fn run_named(a: &CycleAutomaton, rows: &[HashMap<String, Value>]) -> Result<Trace, SimError> {
    let mut positional = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let mut values = Vec::with_capacity(a.cycle_vars.len());
        for &slot in &a.cycle_vars {
            let s = &a.slots[slot];
            let v = *row.get(&s.name).ok_or_else(|| SimError::MissingInput {
                cycle: i + 1,
                var: s.name.clone(),
            })?;
            let ok = matches!(
                (s.ty, v),
                (ValueType::Bool, Value::Bool(_)) | (ValueType::Int | ValueType::Time, Value::Int(_))
            );
            if !ok {
                return Err(SimError::BadInput {
                    cycle: i + 1,
                    var: s.name.clone(),
                    expected: s.ty,
                    value: v.to_string(),
                });
            }
            values.push(v);
        }
        positional.push(values);
    }
    Ok(run_trace(a, &positional))
}
