//! Timing diagrams: loading, harness generation and the loop-unwinding bound.

use std::fmt::Write;

use thiserror::Error;

use crate::plc::{eval, Action, CycleAutomaton, TimerInstance};
use crate::st::printer::ident;
use crate::st::{FunctionBlockDecl, TypeRef, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    High,
    Low,
    Unconstrained,
    /// Integer-valued signal (counter values in rendered counterexamples).
    Int(i64),
}

impl Cell {
    fn parse(text: &str) -> Option<Cell> {
        match text.trim() {
            "1" => Some(Cell::High),
            "0" => Some(Cell::Low),
            "U" | "u" => Some(Cell::Unconstrained),
            other => other.parse().ok().map(Cell::Int),
        }
    }

    fn text(self) -> String {
        match self {
            Cell::High => "1".into(),
            Cell::Low => "0".into(),
            Cell::Unconstrained => "U".into(),
            Cell::Int(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signal {
    pub name: String,
    pub direction: Direction,
    pub cells: Vec<Cell>,
}

/// Per-signal, per-cycle value grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimingDiagram {
    pub cycles: usize,
    pub signals: Vec<Signal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("header must be `signal,dir,1,2,...,n`")]
    BadHeader,
    #[error("line {line}: row `{signal}` has {found} cells, expected {expected}")]
    RaggedRow {
        line: usize,
        signal: String,
        found: usize,
        expected: usize,
    },
    #[error("output `{signal}` is unconstrained at cycle {cycle}")]
    UnconstrainedOutput { signal: String, cycle: usize },
    #[error("`{signal}` at cycle {cycle}: unknown cell value `{value}`")]
    UnknownCellValue {
        signal: String,
        cycle: usize,
        value: String,
    },
    #[error("line {line}: direction must be `in` or `out`, got `{value}`")]
    UnknownDirection { line: usize, value: String },
    #[error("duplicate signal `{0}`")]
    DuplicateSignal(String),
    #[error("diagram needs at least one input and one output signal")]
    MissingSignals,
}

/// Parses a diagram CSV with header `signal,dir,1,...,n` and cells `1`, `0`, `U`.
pub fn load_timing_diagram(text: &str) -> Result<TimingDiagram, DiagramError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| DiagramError::Csv(e.to_string()))?,
        None => return Err(DiagramError::BadHeader),
    };
    let fields: Vec<&str> = header.iter().collect();
    if fields.len() < 3 || !fields[0].eq_ignore_ascii_case("signal") || !fields[1].eq_ignore_ascii_case("dir") {
        return Err(DiagramError::BadHeader);
    }
    for (i, f) in fields[2..].iter().enumerate() {
        if f.parse::<usize>().ok() != Some(i + 1) {
            return Err(DiagramError::BadHeader);
        }
    }
    let cycles = fields.len() - 2;
    let mut signals: Vec<Signal> = Vec::new();
    for record in records {
        let record = record.map_err(|e| DiagramError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row: Vec<&str> = record.iter().collect();
        if row.iter().all(|c| c.is_empty()) {
            continue;
        }
        let name = row[0].to_string();
        if row.len() != cycles + 2 {
            return Err(DiagramError::RaggedRow {
                line,
                signal: name,
                found: row.len().saturating_sub(2),
                expected: cycles,
            });
        }
        let direction = match row[1].to_ascii_lowercase().as_str() {
            "in" | "input" => Direction::Input,
            "out" | "output" => Direction::Output,
            other => {
                return Err(DiagramError::UnknownDirection {
                    line,
                    value: other.to_string(),
                })
            }
        };
        let mut cells = Vec::with_capacity(cycles);
        for (i, text) in row[2..].iter().enumerate() {
            let cell = Cell::parse(text).ok_or_else(|| DiagramError::UnknownCellValue {
                signal: name.clone(),
                cycle: i + 1,
                value: text.to_string(),
            })?;
            if cell == Cell::Unconstrained && direction == Direction::Output {
                return Err(DiagramError::UnconstrainedOutput {
                    signal: name.clone(),
                    cycle: i + 1,
                });
            }
            cells.push(cell);
        }
        if signals.iter().any(|s| s.name == name) {
            return Err(DiagramError::DuplicateSignal(name));
        }
        signals.push(Signal { name, direction, cells });
    }
    let has = |d| signals.iter().any(|s| s.direction == d);
    if !has(Direction::Input) || !has(Direction::Output) {
        return Err(DiagramError::MissingSignals);
    }
    Ok(TimingDiagram { cycles, signals })
}

impl TimingDiagram {
    pub fn inputs(&self) -> impl Iterator<Item = &Signal> {
        self.signals.iter().filter(|s| s.direction == Direction::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Signal> {
        self.signals.iter().filter(|s| s.direction == Direction::Output)
    }

    /// Serializes back to the CSV accepted by [`load_timing_diagram`].
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["signal".to_string(), "dir".to_string()];
        header.extend((1..=self.cycles).map(|c| c.to_string()));
        w.write_record(&header).expect("in-memory write");
        for s in &self.signals {
            let mut row = vec![
                s.name.clone(),
                match s.direction {
                    Direction::Input => "in".into(),
                    Direction::Output => "out".into(),
                },
            ];
            row.extend(s.cells.iter().map(|c| c.text()));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Generated verification harness for one diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarnessSource {
    pub text: String,
    pub driver: String,
    pub instance: String,
    /// `assertion<k>` names in emission order (cycle-major).
    pub assertions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("signal `{signal}` is not declared by `{block}`")]
    SignalNotInInterface { signal: String, block: String },
    #[error("signal `{signal}` is marked {expected} in the diagram but is not a {expected} of `{block}`")]
    DirectionMismatch {
        signal: String,
        block: String,
        expected: &'static str,
    },
    #[error("signal `{signal}` at cycle {cycle}: cell does not fit type {ty}")]
    CellType { signal: String, cycle: usize, ty: String },
}

/// Emits a driver block that replays `d` cycle by cycle against an instance of
/// `target`, with one assertion per output cell.
pub fn generate_harness(d: &TimingDiagram, target: &FunctionBlockDecl) -> Result<HarnessSource, HarnessError> {
    for s in &d.signals {
        let Some((kind, decl)) = target.var(&s.name) else {
            return Err(HarnessError::SignalNotInInterface {
                signal: s.name.clone(),
                block: target.name.clone(),
            });
        };
        let (want, label) = match s.direction {
            Direction::Input => (VarKind::Input, "input"),
            Direction::Output => (VarKind::Output, "output"),
        };
        if kind != want {
            return Err(HarnessError::DirectionMismatch {
                signal: s.name.clone(),
                block: target.name.clone(),
                expected: label,
            });
        }
        for (i, cell) in s.cells.iter().enumerate() {
            let fits = matches!(
                (&decl.ty, cell),
                (_, Cell::Unconstrained)
                    | (TypeRef::Bool, Cell::High | Cell::Low)
                    | (TypeRef::Int | TypeRef::Time, Cell::Int(_) | Cell::High | Cell::Low)
            );
            if !fits {
                return Err(HarnessError::CellType {
                    signal: s.name.clone(),
                    cycle: i + 1,
                    ty: decl.ty.to_string(),
                });
            }
        }
    }

    let bool_signal = |name: &str| matches!(target.var(name), Some((_, d)) if d.ty == TypeRef::Bool);
    let literal = |name: &str, cell: Cell| -> String {
        match (bool_signal(name), cell) {
            (true, Cell::High) => "TRUE".into(),
            (true, Cell::Low) => "FALSE".into(),
            (_, Cell::High) => "1".into(),
            (_, Cell::Low) => "0".into(),
            (_, Cell::Int(i)) => i.to_string(),
            (_, Cell::Unconstrained) => unreachable!(),
        }
    };

    let block = ident(&target.name);
    let instance = format!("{}_inst", target.name);
    let quoted_inst = format!("\"{instance}\"");
    let driver = format!("call_{}", target.name);
    let mut out = String::new();
    writeln!(out, "DATA_BLOCK {quoted_inst} {block}").unwrap();
    out.push_str("BEGIN\nEND_DATA_BLOCK\n\n");
    writeln!(out, "FUNCTION_BLOCK {}", ident(&driver)).unwrap();
    out.push_str("    VAR\n        cycle : INT := 1;\n    END_VAR\n");
    if d.cycles as i64 + 1 > crate::st::IntDomain::DEFAULT.hi {
        writeln!(out, "    //#RANGE(cycle, 0, {})", d.cycles + 1).unwrap();
    }
    out.push_str("BEGIN\n\n");
    for c in 0..d.cycles {
        let head = if c == 0 { "IF" } else { "ELSIF" };
        writeln!(out, "{head} cycle = {} THEN", c + 1).unwrap();
        for s in d.inputs() {
            let cell = s.cells[c];
            if cell == Cell::Unconstrained {
                continue;
            }
            writeln!(
                out,
                "    {quoted_inst}.{} := {};",
                ident(&s.name),
                literal(&s.name, cell)
            )
            .unwrap();
        }
    }
    out.push_str("END_IF;\n\n");
    writeln!(out, "{block}.{quoted_inst}();\n").unwrap();
    let mut assertions = Vec::new();
    for c in 0..d.cycles {
        for s in d.outputs() {
            let name = format!("assertion{}", assertions.len() + 1);
            writeln!(
                out,
                "//#ASSERT(cycle = {} --> ({quoted_inst}.{} = {})) : {name};",
                c + 1,
                ident(&s.name),
                literal(&s.name, s.cells[c])
            )
            .unwrap();
            assertions.push(name);
        }
    }
    out.push_str("\ncycle := cycle + 1;\n\nEND_FUNCTION_BLOCK\n");
    Ok(HarnessSource {
        text: out,
        driver,
        instance,
        assertions,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnwindError {
    #[error("cycle time must be positive")]
    ZeroCycleTime,
    #[error("preset of timer `{0}` is not a compile-time constant; give `unwind` explicitly")]
    NonConstantPreset(String),
}

/// `K = max(c_c, c_t)` where `c_c = max(int(PT / t_cycle) + 1)` over timers.
pub fn compute_unwinding(presets: &[i64], t_cycle: i64, diagram_cycles: usize) -> Result<usize, UnwindError> {
    if t_cycle <= 0 {
        return Err(UnwindError::ZeroCycleTime);
    }
    let timer_cycles = presets
        .iter()
        .map(|&pt| (pt.max(0) / t_cycle) as usize + 1)
        .max()
        .unwrap_or(0);
    Ok(timer_cycles.max(diagram_cycles))
}

/// Every preset a TON of `a` can receive, which must all be constants.
pub fn timer_presets(a: &CycleAutomaton) -> Result<Vec<i64>, UnwindError> {
    let mut presets = Vec::new();
    for timer in &a.timers {
        let TimerInstance::Ton { name, preset, .. } = timer else {
            continue;
        };
        let mut assigned = false;
        for edge in &a.edges {
            for action in &edge.actions {
                let Action::Assign(slot, value) = action else {
                    continue;
                };
                if slot != preset {
                    continue;
                }
                let mut used = Vec::new();
                value.slots(&mut used);
                if !used.is_empty() {
                    return Err(UnwindError::NonConstantPreset(name.clone()));
                }
                presets.push(eval(value, &[]).as_int());
                assigned = true;
            }
        }
        if !assigned {
            presets.push(a.slots[*preset].init.as_int());
        }
    }
    Ok(presets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::st::{parse_source, typecheck_and_resolve};

    const FIG4: &str = include_str!("../corpus/fdback_timing.csv");
    const FDBACK: &str = include_str!("../corpus/fdback_simplified.scl");

    #[test]
    fn loads_fdback_diagram() {
        let d = load_timing_diagram(FIG4).unwrap();
        assert_eq!(d.cycles, 6);
        assert_eq!(d.inputs().count(), 3);
        let ack = &d.signals[2];
        assert_eq!(ack.cells[..3], [Cell::Unconstrained; 3]);
        assert_eq!(load_timing_diagram(&d.to_csv()).unwrap(), d);
    }

    #[test]
    fn rejects_bad_diagrams() {
        let err = load_timing_diagram("signal,dir,1\na,in,1\nb,out,U\n").unwrap_err();
        assert!(matches!(err, DiagramError::UnconstrainedOutput { .. }));
        let err = load_timing_diagram("signal,dir,1,2\na,in,1\nb,out,0,0\n").unwrap_err();
        assert!(matches!(err, DiagramError::RaggedRow { .. }));
        let err = load_timing_diagram("signal,dir,1\na,in,X\nb,out,0\n").unwrap_err();
        assert!(matches!(err, DiagramError::UnknownCellValue { .. }));
        let minimal = load_timing_diagram("signal,dir,1\na,in,0\nb,out,0\n").unwrap();
        assert_eq!(minimal.cycles, 1);
    }

    #[test]
    fn harness_has_driver_shape() {
        let d = load_timing_diagram(FIG4).unwrap();
        let unit = parse_source("f.scl", FDBACK).unwrap();
        let fb = unit.blocks().next().unwrap();
        let h = generate_harness(&d, fb).unwrap();
        assert_eq!(h.assertions.len(), 6);
        assert!(h.text.contains(
            "IF cycle = 1 THEN\n    \"FDBACK_simplified_inst\".ON := FALSE;\n    \"FDBACK_simplified_inst\".FEEDBACK := TRUE;\nELSIF"
        ));
        assert!(h
            .text
            .contains("//#ASSERT(cycle = 1 --> (\"FDBACK_simplified_inst\".ERROR = FALSE)) : assertion1;"));
        let branch3 = h.text.split("cycle = 3 THEN").nth(1).unwrap();
        let branch3 = branch3.split("ELSIF").next().unwrap();
        assert!(!branch3.contains(".ACK :="));
        let harness = parse_source("h.scl", &h.text).unwrap();
        typecheck_and_resolve(&[unit.clone(), harness]).unwrap();
        assert_eq!(generate_harness(&d, fb).unwrap().text, h.text);
    }

    #[test]
    fn harness_rejects_unknown_signal() {
        let d = load_timing_diagram("signal,dir,1\nON,in,1\nNOPE,out,0\n").unwrap();
        let unit = parse_source("f.scl", FDBACK).unwrap();
        let err = generate_harness(&d, unit.blocks().next().unwrap()).unwrap_err();
        assert!(matches!(err, HarnessError::SignalNotInInterface { .. }));
        let d = load_timing_diagram("signal,dir,1\nERROR,in,1\nON,out,0\n").unwrap();
        let err = generate_harness(&d, unit.blocks().next().unwrap()).unwrap_err();
        assert!(matches!(err, HarnessError::DirectionMismatch { .. }));
    }

    #[test]
    fn unwinding_rule() {
        assert_eq!(compute_unwinding(&[400], 200, 6), Ok(6));
        assert_eq!(compute_unwinding(&[], 100, 4), Ok(4));
        assert_eq!(compute_unwinding(&[400], 100, 2), Ok(5));
        assert_eq!(compute_unwinding(&[200], 100, 0), Ok(3));
        assert_eq!(compute_unwinding(&[400], 0, 2), Err(UnwindError::ZeroCycleTime));
    }
}
