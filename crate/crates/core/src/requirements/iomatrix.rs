//! I/O matrices: rows of inputs that set or reset outputs.

use std::fmt::Write;

use super::{read_matrix, RequirementError};
use crate::st::printer::ident;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IoCell {
    Blank,
    Set,
    Reset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Priority {
    /// Rows are applied in order, so a later row overrides an earlier one.
    #[default]
    RowOrderLastWins,
    /// Inputs are declared mutually exclusive; an assumption enforces it.
    MutuallyExclusiveDeclared,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IoMatrix {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// `cells[input][output]`.
    pub cells: Vec<Vec<IoCell>>,
    pub priority: Priority,
}

/// Monitor function block generated from a requirement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monitor {
    pub block: String,
    pub source: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

/// Reads an I/O matrix CSV. The top-left cell may hold `priority=last-wins`
/// or `priority=exclusive`.
pub fn parse_io_matrix(text: &str) -> Result<IoMatrix, RequirementError> {
    let (corner, outputs, rows) = read_matrix(text)?;
    let priority = match corner.replace(' ', "").to_ascii_lowercase().as_str() {
        "" | "priority=last-wins" => Priority::RowOrderLastWins,
        "priority=exclusive" => Priority::MutuallyExclusiveDeclared,
        other => {
            return Err(RequirementError::Table(format!(
                "top-left cell must be empty, `priority=last-wins` or `priority=exclusive`, got `{other}`"
            )))
        }
    };
    let mut inputs = Vec::new();
    let mut cells = Vec::new();
    for (name, row) in rows {
        let parsed = row
            .iter()
            .map(|c| match c.to_ascii_lowercase().as_str() {
                "" => Ok(IoCell::Blank),
                "set" => Ok(IoCell::Set),
                "reset" => Ok(IoCell::Reset),
                _ => Err(RequirementError::Table(format!(
                    "row `{name}`: cell must be Set, Reset or empty, got `{c}`"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        inputs.push(name);
        cells.push(parsed);
    }
    Ok(IoMatrix {
        inputs,
        outputs,
        cells,
        priority,
    })
}

/// Builds the monitor block `block`: one `IF` per row, in row order.
pub fn compile_io_matrix(m: &IoMatrix, block: &str) -> Result<Monitor, RequirementError> {
    for (i, row) in m.cells.iter().enumerate() {
        if row.iter().all(|c| *c == IoCell::Blank) {
            return Err(RequirementError::EmptyRow(m.inputs[i].clone()));
        }
    }
    let mut s = String::new();
    writeln!(s, "FUNCTION_BLOCK {}", ident(block)).unwrap();
    s.push_str("    VAR_INPUT\n");
    for i in &m.inputs {
        writeln!(s, "        {} : BOOL;", ident(i)).unwrap();
    }
    s.push_str("    END_VAR\n    VAR_OUTPUT\n");
    for o in &m.outputs {
        writeln!(s, "        {} : BOOL;", ident(o)).unwrap();
    }
    s.push_str("    END_VAR\nBEGIN\n");
    if m.priority == Priority::MutuallyExclusiveDeclared && m.inputs.len() > 1 {
        let mut pairs = Vec::new();
        for a in 0..m.inputs.len() {
            for b in a + 1..m.inputs.len() {
                pairs.push(format!("NOT ({} AND {})", ident(&m.inputs[a]), ident(&m.inputs[b])));
            }
        }
        writeln!(s, "    //#ASSUME({}) : inputs_exclusive;", pairs.join(" AND ")).unwrap();
    }
    for (i, row) in m.cells.iter().enumerate() {
        writeln!(s, "    IF {} THEN", ident(&m.inputs[i])).unwrap();
        for (o, cell) in row.iter().enumerate() {
            let value = match cell {
                IoCell::Blank => continue,
                IoCell::Set => "TRUE",
                IoCell::Reset => "FALSE",
            };
            writeln!(s, "        {} := {value};", ident(&m.outputs[o])).unwrap();
        }
        s.push_str("    END_IF;\n");
    }
    s.push_str("END_FUNCTION_BLOCK\n");
    Ok(Monitor {
        block: block.to_string(),
        source: s,
        inputs: m.inputs.clone(),
        outputs: m.outputs.clone(),
    })
}
