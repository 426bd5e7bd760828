//! Cause-and-effect matrices: OR over groups of AND over marked inputs.

use std::collections::BTreeSet;

use super::{read_matrix, RequirementError};
use crate::st::{BinOp, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CemCell {
    Blank,
    /// Input must hold within the group.
    A(u32),
    /// Input must not hold within the group.
    Na(u32),
}

impl CemCell {
    pub fn parse(text: &str) -> Option<CemCell> {
        let t = text.trim();
        if t.is_empty() {
            return Some(CemCell::Blank);
        }
        let upper = t.to_ascii_uppercase();
        let (negated, digits) = match upper.strip_prefix("NA") {
            Some(rest) => (true, rest),
            None => (false, upper.strip_prefix('A')?),
        };
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let group = digits.parse().ok()?;
        Some(if negated { CemCell::Na(group) } else { CemCell::A(group) })
    }

    pub fn group(self) -> Option<u32> {
        match self {
            CemCell::Blank => None,
            CemCell::A(g) | CemCell::Na(g) => Some(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CemTable {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// `cells[input][output]`.
    pub cells: Vec<Vec<CemCell>>,
}

impl CemTable {
    pub fn cell(&self, input: usize, output: usize) -> CemCell {
        self.cells[input][output]
    }
}

/// Reads a CEM CSV: first row names the outputs, first column the inputs.
pub fn parse_cem(text: &str) -> Result<CemTable, RequirementError> {
    let (_, outputs, rows) = read_matrix(text)?;
    let mut inputs = Vec::new();
    let mut cells = Vec::new();
    for (name, row) in rows {
        let mut parsed = Vec::new();
        for (col, text) in row.iter().enumerate() {
            parsed.push(CemCell::parse(text).ok_or_else(|| {
                RequirementError::Table(format!(
                    "cell ({name}, {}) must be A<n>, NA<n> or empty, got `{text}`",
                    outputs[col]
                ))
            })?);
        }
        inputs.push(name);
        cells.push(parsed);
    }
    Ok(CemTable { inputs, outputs, cells })
}

/// One `output = formula` pair per column. Groups are numbered per column.
pub fn compile_cem(t: &CemTable) -> Result<Vec<(String, Expr)>, RequirementError> {
    let mut out = Vec::new();
    for (o, output) in t.outputs.iter().enumerate() {
        let groups: BTreeSet<u32> = (0..t.inputs.len()).filter_map(|i| t.cell(i, o).group()).collect();
        if groups.is_empty() {
            return Err(RequirementError::EmptyColumn(output.clone()));
        }
        let contiguous = groups.iter().enumerate().all(|(k, &g)| g as usize == k + 1);
        if !contiguous {
            return Err(RequirementError::NonContiguousGroups {
                output: output.clone(),
                groups: groups.into_iter().collect(),
            });
        }
        let terms = groups.iter().map(|&g| {
            let literals = (0..t.inputs.len()).filter_map(|i| match t.cell(i, o) {
                CemCell::A(h) if h == g => Some(Expr::var(&t.inputs[i])),
                CemCell::Na(h) if h == g => Some(Expr::not(Expr::var(&t.inputs[i]))),
                _ => None,
            });
            Expr::fold(BinOp::And, literals).expect("group has a cell")
        });
        out.push((
            output.clone(),
            Expr::fold(BinOp::Or, terms).expect("column has a group"),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::st::printer::print_expr;

    #[test]
    fn cell_codes() {
        assert_eq!(CemCell::parse("A1"), Some(CemCell::A(1)));
        assert_eq!(CemCell::parse("na12"), Some(CemCell::Na(12)));
        assert_eq!(CemCell::parse(""), Some(CemCell::Blank));
        assert_eq!(CemCell::parse("B1"), None);
        assert_eq!(CemCell::parse("A"), None);
    }

    #[test]
    fn single_literal_column() {
        let t = parse_cem(",Out\nIn,A1\n").unwrap();
        let f = compile_cem(&t).unwrap();
        assert_eq!(f, [("Out".to_string(), Expr::var("In"))]);
    }

    #[test]
    fn column_errors() {
        let t = parse_cem(",O1,O2\na,A1,\nb,A1,\n").unwrap();
        assert_eq!(compile_cem(&t), Err(RequirementError::EmptyColumn("O2".into())));
        let t = parse_cem(",O\na,A1\nb,NA3\n").unwrap();
        assert!(matches!(
            compile_cem(&t),
            Err(RequirementError::NonContiguousGroups { .. })
        ));
    }

    #[test]
    fn formula_text() {
        let t = parse_cem(include_str!("../../corpus/requirements/two_outputs.cem.csv")).unwrap();
        let f = compile_cem(&t).unwrap();
        assert_eq!(print_expr(&f[0].1), "In_1 AND In_2 OR NOT In_3 AND NOT In_4");
        assert_eq!(print_expr(&f[1].1), "In_1 AND In_2 AND In_3 AND In_4");
    }
}
