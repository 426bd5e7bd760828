//! File plumbing: reading sources, case files, diagrams and input tables into
//! checked programs and ready-to-run verification cases.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::bmc::{parse_case, CaseError, CaseFile, Unwind, VerificationCase};
use crate::harness::{compute_unwinding, load_timing_diagram, timer_presets, DiagramError, UnwindError};
use crate::plc::{CycleAutomaton, InputOrder, LowerError, Value};
use crate::st::{parse_source, typecheck_and_resolve, Diagnostic, SourceUnit, Span, TypedProgram, ValueType};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Source(Diagnostic),
    #[error("{path}: {source}")]
    Case { path: String, source: CaseError },
    #[error("{path}: {source}")]
    Diagram { path: String, source: DiagramError },
    #[error("{path}: {message}")]
    Inputs { path: String, message: String },
    #[error(transparent)]
    Unwind(#[from] UnwindError),
    #[error(transparent)]
    Lower(#[from] LowerError),
}

impl LoadError {
    /// The error as a `path:line:col: code: message` diagnostic.
    pub fn diagnostic(&self) -> Diagnostic {
        match self {
            LoadError::Io { path, source } => Diagnostic::new(path, Span::default(), "io-error", source.to_string()),
            LoadError::Source(d) => d.clone(),
            LoadError::Case { path, source } => {
                let line = match source {
                    CaseError::Line { line, .. } => *line as u32,
                    CaseError::Missing(_) => 1,
                };
                let message = match source {
                    CaseError::Line { message, .. } => message.clone(),
                    other => other.to_string(),
                };
                Diagnostic::new(path, Span::new(line, 1), "case-error", message)
            }
            LoadError::Diagram { path, source } => {
                Diagnostic::new(path, Span::default(), "diagram-error", source.to_string())
            }
            LoadError::Inputs { path, message } => Diagnostic::new(path, Span::default(), "input-error", message),
            LoadError::Unwind(e) => Diagnostic::new("<case>", Span::default(), "unwind-error", e.to_string()),
            LoadError::Lower(e) => Diagnostic::new("<case>", Span::default(), "lower-error", e.to_string()),
        }
    }
}

pub fn read_file(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_sources(paths: &[PathBuf]) -> Result<Vec<SourceUnit>, LoadError> {
    let mut units = Vec::new();
    for p in paths {
        let text = read_file(p)?;
        let shown = p.display().to_string();
        let unit = parse_source(&shown, &text)
            .map_err(|e| LoadError::Source(Diagnostic::new(&shown, e.span(), e.code(), e.to_string())))?;
        units.push(unit);
    }
    Ok(units)
}

pub fn check_units(units: &[SourceUnit]) -> Result<TypedProgram, LoadError> {
    typecheck_and_resolve(units)
        .map_err(|e| LoadError::Source(Diagnostic::new(e.path(), e.span(), e.code(), e.to_string())))
}

pub fn load_program(paths: &[PathBuf]) -> Result<TypedProgram, LoadError> {
    check_units(&load_sources(paths)?)
}

/// How the unwinding bound of a case was chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Unwinding {
    Fixed(usize),
    Auto {
        presets: Vec<i64>,
        diagram_cycles: usize,
        bound: usize,
    },
}

impl Unwinding {
    pub fn bound(&self) -> usize {
        match self {
            Unwinding::Fixed(k) => *k,
            Unwinding::Auto { bound, .. } => *bound,
        }
    }

    pub fn describe(&self, t_cycle: i64) -> String {
        match self {
            Unwinding::Fixed(k) => format!("{k} (fixed)"),
            Unwinding::Auto {
                presets,
                diagram_cycles,
                bound,
            } => {
                let timer_cycles = presets.iter().map(|pt| pt / t_cycle + 1).max().unwrap_or(0);
                format!(
                    "{bound} (auto: timer presets {presets:?} ms give {timer_cycles} cycles, diagram has {diagram_cycles})"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timing {
    pub parse_ms: f64,
    pub lower_ms: f64,
    pub verify_ms: f64,
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

#[derive(Debug, Clone)]
pub struct LoadedCase {
    pub path: PathBuf,
    pub file: CaseFile,
    pub case: VerificationCase,
    pub automaton: CycleAutomaton,
    pub unwinding: Unwinding,
    pub timing: Timing,
}

impl LoadedCase {
    /// File stem used to name outputs.
    pub fn stem(&self) -> String {
        file_stem(&self.path)
    }
}

pub fn file_stem(p: &Path) -> String {
    let name = p
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.split('.').next().unwrap_or("").to_string()
}

/// Reads a case file together with its sources and resolves `unwind auto`.
pub fn load_case(path: &Path, order: InputOrder) -> Result<LoadedCase, LoadError> {
    let text = read_file(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let file = parse_case(&text, base).map_err(|source| LoadError::Case {
        path: path.display().to_string(),
        source,
    })?;
    let start = Instant::now();
    let program = load_program(&file.sources)?;
    let parse_ms = elapsed_ms(start);
    prepare_case(path, file, program, order, parse_ms)
}

/// Builds a case from an already checked program.
pub fn prepare_case(
    path: &Path,
    file: CaseFile,
    program: TypedProgram,
    order: InputOrder,
    parse_ms: f64,
) -> Result<LoadedCase, LoadError> {
    let start = Instant::now();
    let mut case = VerificationCase {
        program,
        entry: file.entry.clone(),
        t_cycle: file.t_cycle_ms,
        bound: 1,
        assumptions: file.assumptions.clone(),
        order,
    };
    let automaton = case.lower()?;
    let lower_ms = elapsed_ms(start);
    let unwinding = match file.unwind {
        Unwind::Fixed(k) => Unwinding::Fixed(k),
        Unwind::Auto => {
            let presets = timer_presets(&automaton)?;
            let diagram_cycles = match &file.diagram {
                Some(d) => {
                    let text = read_file(d)?;
                    load_timing_diagram(&text)
                        .map_err(|source| LoadError::Diagram {
                            path: d.display().to_string(),
                            source,
                        })?
                        .cycles
                }
                None => 0,
            };
            let bound = compute_unwinding(&presets, file.t_cycle_ms, diagram_cycles)?.max(1);
            Unwinding::Auto {
                presets,
                diagram_cycles,
                bound,
            }
        }
    };
    case.bound = unwinding.bound();
    Ok(LoadedCase {
        path: path.to_path_buf(),
        file,
        case,
        automaton,
        unwinding,
        timing: Timing {
            parse_ms,
            lower_ms,
            verify_ms: 0.0,
        },
    })
}

fn parse_value(text: &str, ty: ValueType) -> Option<Value> {
    let t = text.trim();
    match ty {
        ValueType::Bool => match t.to_ascii_uppercase().as_str() {
            "1" | "TRUE" => Some(Value::Bool(true)),
            "0" | "FALSE" => Some(Value::Bool(false)),
            _ => None,
        },
        ValueType::Int | ValueType::Time => t.parse().ok().map(Value::Int),
    }
}

/// Reads simulation inputs: either a timing diagram (header starting with
/// `signal`) whose `U` cells read as the lowest value, or a table with one
/// column per input and one row per cycle (an optional `cycle` column is ignored).
pub fn read_input_rows(path: &Path, a: &CycleAutomaton) -> Result<Vec<HashMap<String, Value>>, LoadError> {
    let text = read_file(path)?;
    let shown = path.display().to_string();
    let inputs_err = |message: String| LoadError::Inputs {
        path: shown.clone(),
        message,
    };
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.split(',').next().map(str::trim) == Some("signal") {
        let d = load_timing_diagram(&text).map_err(|source| LoadError::Diagram {
            path: shown.clone(),
            source,
        })?;
        return Ok(crate::bmc::render::diagram_rows(&d, a));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| inputs_err(e.to_string()))?.clone();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| inputs_err(e.to_string()))?;
        let mut row = HashMap::new();
        for (name, cell) in headers.iter().zip(record.iter()) {
            if name == "cycle" {
                continue;
            }
            let ty = a
                .slot_by_name(name)
                .map(|s| a.slots[s].ty)
                .ok_or_else(|| inputs_err(format!("column `{name}` is not a variable of the model")))?;
            let v = parse_value(cell, ty)
                .ok_or_else(|| inputs_err(format!("row {}: `{cell}` is not a valid {ty} for `{name}`", i + 1)))?;
            row.insert(name.to_string(), v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(inputs_err("no input rows".into()));
    }
    Ok(rows)
}
