//! Requirement formalisms compiled to assertions and monitor blocks.

pub mod cem;
pub mod iomatrix;
pub mod logic;
pub mod state_machine;
pub mod wrapper;

use thiserror::Error;

use crate::st::Expr;

pub use cem::{compile_cem, parse_cem, CemCell, CemTable};
pub use iomatrix::{compile_io_matrix, parse_io_matrix, IoCell, IoMatrix, Monitor, Priority};
pub use logic::{compile_logic_diagram, parse_logic, Gate, LogicDiagram};
pub use state_machine::{
    check_sm_completeness, check_sm_determinism, compile_state_machine, parse_state_machine, Conflict, Gap,
    StateMachineSpec, Transition,
};
pub use wrapper::{build_wrapper, parse_mapping, Mapping, Wrapper};

/// A requirement in any of the supported formalisms.
#[derive(Debug, Clone, PartialEq)]
pub enum RequirementSpec {
    Cem(CemTable),
    IoMatrix(IoMatrix),
    StateMachine(StateMachineSpec),
    Logic(Vec<LogicDiagram>),
    Assertion { name: String, expr: Expr },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RequirementError {
    #[error("malformed table: {0}")]
    Table(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("output column `{0}` has no entries")]
    EmptyColumn(String),
    #[error("output column `{output}` uses groups {groups:?}; group ids must be 1..n without gaps")]
    NonContiguousGroups { output: String, groups: Vec<u32> },
    #[error("input row `{0}` has no entries")]
    EmptyRow(String),
    #[error("{count} guard inputs exceed the limit of {limit} for exhaustive checking")]
    TooManyInputs { count: usize, limit: usize },
    #[error("state machine is nondeterministic ({0} conflicts)")]
    NondeterministicSpec(usize),
    #[error("state machine is incomplete ({0} gaps)")]
    IncompleteSpec(usize),
}

/// Top-left cell, column names, and named rows of cells.
type Matrix = (String, Vec<String>, Vec<(String, Vec<String>)>);

/// Splits a matrix CSV into its top-left cell, column names and rows.
fn read_matrix(text: &str) -> Result<Matrix, RequirementError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| RequirementError::Table("empty file".into()))?
        .map_err(|e| RequirementError::Table(e.to_string()))?;
    let corner = header.get(0).unwrap_or("").to_string();
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if columns.is_empty() || columns.iter().any(String::is_empty) {
        return Err(RequirementError::Table(
            "first row must name every output column".into(),
        ));
    }
    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| RequirementError::Table(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let name = record.get(0).unwrap_or("").to_string();
        if name.is_empty() {
            return Err(RequirementError::Table("every row needs an input name".into()));
        }
        let mut cells: Vec<String> = record.iter().skip(1).map(str::to_string).collect();
        if cells.len() > columns.len() {
            return Err(RequirementError::Table(format!("row `{name}` has too many cells")));
        }
        cells.resize(columns.len(), String::new());
        rows.push((name, cells));
    }
    if rows.is_empty() {
        return Err(RequirementError::Table("no input rows".into()));
    }
    Ok((corner, columns, rows))
}

/// Identifiers of `e` in order of first appearance.
fn input_names(exprs: &[&Expr]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for e in exprs {
        for v in e.vars() {
            let name = v.to_string();
            if !out.contains(&name) {
                out.push(name);
            }
        }
    }
    out
}
