//! Line-based verification-case files.
//!
//! ```text
//! source fdback_simplified.scl
//! entry call_FDBACK_simplified
//! t_cycle_ms 200
//! unwind auto
//! assume v_1 = FALSE
//! diagram fdback_timing.csv
//! ```

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::st::{parse_expr_at, Expr, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unwind {
    Fixed(usize),
    /// Derived from timer presets and the diagram length.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseFile {
    pub sources: Vec<PathBuf>,
    pub entry: String,
    pub t_cycle_ms: i64,
    pub unwind: Unwind,
    pub assumptions: Vec<Expr>,
    /// Timing diagram whose length bounds `unwind auto` from below.
    pub diagram: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing `{0}` line")]
    Missing(&'static str),
}

/// Parses a case file; relative paths are resolved against `base`.
pub fn parse_case(text: &str, base: &Path) -> Result<CaseFile, CaseError> {
    let mut sources = Vec::new();
    let mut entry = None;
    let mut t_cycle = None;
    let mut unwind = None;
    let mut assumptions = Vec::new();
    let mut diagram = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| CaseError::Line { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = match trimmed.split_once(char::is_whitespace) {
            Some((k, v)) => (k, v.trim()),
            None => (trimmed, ""),
        };
        if value.is_empty() {
            return Err(err(format!("`{key}` needs a value")));
        }
        match key {
            "source" => sources.push(base.join(value)),
            "entry" => entry = Some(value.to_string()),
            "t_cycle_ms" => {
                let v: i64 = value.parse().map_err(|_| err(format!("`{value}` is not an integer")))?;
                if v <= 0 {
                    return Err(err("cycle time must be positive".into()));
                }
                t_cycle = Some(v);
            }
            "unwind" => {
                unwind = Some(if value == "auto" {
                    Unwind::Auto
                } else {
                    match value.parse::<usize>() {
                        Ok(k) if k >= 1 => Unwind::Fixed(k),
                        _ => {
                            return Err(err(format!(
                                "unwind must be `auto` or a positive integer, got `{value}`"
                            )))
                        }
                    }
                });
            }
            "assume" => {
                let col = raw.find(value).unwrap_or(0) + 1;
                let expr = parse_expr_at(value, Span::new(line as u32, col as u32))
                    .map_err(|e| err(format!("assumption: {e}")))?;
                assumptions.push(expr);
            }
            "diagram" => diagram = Some(base.join(value)),
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    if sources.is_empty() {
        return Err(CaseError::Missing("source"));
    }
    Ok(CaseFile {
        sources,
        entry: entry.ok_or(CaseError::Missing("entry"))?,
        t_cycle_ms: t_cycle.ok_or(CaseError::Missing("t_cycle_ms"))?,
        unwind: unwind.ok_or(CaseError::Missing("unwind"))?,
        assumptions,
        diagram,
    })
}
