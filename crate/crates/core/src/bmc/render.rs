//! Counterexamples as timing diagrams, and diagrams back to input rows.

use std::collections::HashMap;

use thiserror::Error;

use super::Verdict;
use crate::harness::{Cell, Direction, Signal, TimingDiagram};
use crate::plc::{CycleAutomaton, Value};
use crate::st::ValueType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("assertion `{0}` is not violated")]
pub struct NotViolated(pub String);

fn cell(v: Value, ty: ValueType) -> Cell {
    match (ty, v) {
        (ValueType::Bool, v) if v.as_bool() => Cell::High,
        (ValueType::Bool, _) => Cell::Low,
        (_, v) => Cell::Int(v.as_int()),
    }
}

/// Diagram with every input (sampled values) and every visible slot
/// (end-of-cycle values) for cycles 1 up to the violation.
pub fn render_counterexample(a: &CycleAutomaton, v: &Verdict) -> Result<TimingDiagram, NotViolated> {
    let cex = v
        .counterexample
        .as_ref()
        .ok_or_else(|| NotViolated(v.assertion.clone()))?;
    let mut signals = Vec::new();
    for (i, &slot) in a.cycle_vars.iter().enumerate() {
        let s = &a.slots[slot];
        signals.push(Signal {
            name: s.name.clone(),
            direction: Direction::Input,
            cells: cex.inputs.iter().map(|row| cell(row[i], s.ty)).collect(),
        });
    }
    for (slot, s) in a.slots.iter().enumerate() {
        if s.hidden || a.cycle_vars.contains(&slot) {
            continue;
        }
        signals.push(Signal {
            name: s.name.clone(),
            direction: Direction::Output,
            cells: cex.trace.states.iter().map(|st| cell(st.values[slot], s.ty)).collect(),
        });
    }
    Ok(TimingDiagram {
        cycles: cex.inputs.len(),
        signals,
    })
}

/// Per-cycle input valuations taken from the input rows of `d`; unconstrained
/// cells read as FALSE (or the domain minimum for integers).
pub fn diagram_rows(d: &TimingDiagram, a: &CycleAutomaton) -> Vec<HashMap<String, Value>> {
    (0..d.cycles)
        .map(|c| {
            d.inputs()
                .map(|s| {
                    let slot = a.slot_by_name(&s.name).map(|i| &a.slots[i]);
                    let boolean = slot.is_none_or(|sl| sl.ty == ValueType::Bool);
                    let low = slot.and_then(|sl| sl.domain).map_or(0, |dom| dom.clamp(0));
                    let v = match (boolean, s.cells[c]) {
                        (true, Cell::High) => Value::Bool(true),
                        (true, Cell::Low | Cell::Unconstrained) => Value::Bool(false),
                        (true, Cell::Int(i)) => Value::Bool(i != 0),
                        (false, Cell::High) => Value::Int(1),
                        (false, Cell::Low) => Value::Int(0),
                        (false, Cell::Unconstrained) => Value::Int(low),
                        (false, Cell::Int(i)) => Value::Int(i),
                    };
                    (s.name.clone(), v)
                })
                .collect()
        })
        .collect()
}
