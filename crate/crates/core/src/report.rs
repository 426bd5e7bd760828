//! Markdown verification reports and their counterexample files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::bmc::{render_counterexample, Outcome, Status};
use crate::pipeline::Timing;
use crate::plc::CycleAutomaton;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub assertion: String,
    pub status: Status,
    /// File name of the counterexample CSV, relative to the report.
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub case_id: String,
    pub tool_version: String,
    pub entry: String,
    pub t_cycle_ms: i64,
    pub unwinding: String,
    pub budget: u64,
    pub assumptions: Vec<String>,
    /// Extra lines printed before the verdict table, such as requirement diagnostics.
    pub notes: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub vacuous_from: Option<usize>,
    pub explored: u64,
    pub distinct_states: usize,
    pub timing: Timing,
}

impl Report {
    pub fn violated(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| matches!(r.status, Status::Violated { .. }))
            .count()
    }

    pub fn summary(&self) -> String {
        match self.violated() {
            0 => "ALL SATISFIED".to_string(),
            1 => "1 assertion VIOLATED".to_string(),
            n => format!("{n} assertions VIOLATED"),
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# Verification report: {}\n", self.case_id).unwrap();
        writeln!(s, "## Case\n").unwrap();
        writeln!(s, "- entry block: `{}`", self.entry).unwrap();
        if self.assumptions.is_empty() {
            writeln!(s, "- assumptions: none").unwrap();
        }
        for a in &self.assumptions {
            writeln!(s, "- assumption: `{a}`").unwrap();
        }
        writeln!(s, "\n## Settings\n").unwrap();
        writeln!(s, "- tool: {}", self.tool_version).unwrap();
        writeln!(s, "- cycle time: {} ms", self.t_cycle_ms).unwrap();
        writeln!(s, "- unwinding: {}", self.unwinding).unwrap();
        writeln!(s, "- state budget: {}", self.budget).unwrap();
        if !self.notes.is_empty() {
            writeln!(s, "\n## Requirement diagnostics\n").unwrap();
            for n in &self.notes {
                writeln!(s, "- {n}").unwrap();
            }
        }
        writeln!(s, "\n## Verdicts\n").unwrap();
        writeln!(s, "| assertion | status | bound | counterexample |").unwrap();
        writeln!(s, "|---|---|---|---|").unwrap();
        for r in &self.rows {
            let (status, bound) = match r.status {
                Status::Satisfied { bound } => ("Satisfied".to_string(), bound.to_string()),
                Status::Violated { cycle } => (format!("Violated at cycle {cycle}"), "-".to_string()),
            };
            let cex = r
                .counterexample
                .as_ref()
                .map_or("-".to_string(), |f| format!("[{f}]({f})"));
            writeln!(s, "| {} | {status} | {bound} | {cex} |", r.assertion).unwrap();
        }
        writeln!(s, "\n**{}**", self.summary()).unwrap();
        if let Some(c) = self.vacuous_from {
            writeln!(
                s,
                "\nNote: assumptions exclude every execution from cycle {c} on; results are vacuous from cycle {c}."
            )
            .unwrap();
        }
        writeln!(s, "\n## Counterexamples\n").unwrap();
        let cexs: Vec<&ReportRow> = self.rows.iter().filter(|r| r.counterexample.is_some()).collect();
        if cexs.is_empty() {
            writeln!(s, "None.").unwrap();
        }
        for r in cexs {
            writeln!(
                s,
                "- `{}`: `{}`",
                r.assertion,
                r.counterexample.as_deref().unwrap_or_default()
            )
            .unwrap();
        }
        writeln!(s, "\n## Timing\n").unwrap();
        writeln!(s, "- parse and type check: {:.1} ms", self.timing.parse_ms).unwrap();
        writeln!(s, "- lowering: {:.1} ms", self.timing.lower_ms).unwrap();
        writeln!(s, "- exploration: {:.1} ms", self.timing.verify_ms).unwrap();
        writeln!(
            s,
            "- transitions evaluated: {}; distinct states: {} (initial included)",
            self.explored, self.distinct_states
        )
        .unwrap();
        s
    }
}

/// Settings copied into a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSettings {
    pub case_id: String,
    pub entry: String,
    pub t_cycle_ms: i64,
    pub unwinding: String,
    pub budget: u64,
    pub assumptions: Vec<String>,
    pub notes: Vec<String>,
    pub timing: Timing,
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `<case_id>_report.md` and one `<case_id>_<assertion>_cex.csv` per
/// violated assertion into `dir`; returns the report and its path.
pub fn write_report(
    dir: &Path,
    settings: ReportSettings,
    a: &CycleAutomaton,
    outcome: &Outcome,
) -> io::Result<(Report, PathBuf)> {
    fs::create_dir_all(dir)?;
    let mut rows = Vec::new();
    for v in &outcome.verdicts {
        let counterexample = match render_counterexample(a, v) {
            Ok(diagram) => {
                let name = format!("{}_{}_cex.csv", settings.case_id, file_safe(&v.assertion));
                fs::write(dir.join(&name), diagram.to_csv())?;
                Some(name)
            }
            Err(_) => None,
        };
        rows.push(ReportRow {
            assertion: v.assertion.clone(),
            status: v.status.clone(),
            counterexample,
        });
    }
    let report = Report {
        case_id: settings.case_id,
        tool_version: TOOL_VERSION.to_string(),
        entry: settings.entry,
        t_cycle_ms: settings.t_cycle_ms,
        unwinding: settings.unwinding,
        budget: settings.budget,
        assumptions: settings.assumptions,
        notes: settings.notes,
        rows,
        vacuous_from: outcome.vacuous_from,
        explored: outcome.explored,
        distinct_states: outcome.distinct_states,
        timing: settings.timing,
    };
    let path = dir.join(format!("{}_report.md", report.case_id));
    fs::write(&path, report.to_markdown())?;
    Ok((report, path))
}
