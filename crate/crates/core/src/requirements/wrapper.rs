//! Wrapper programs that run a program under test next to a requirement
//! monitor and assert that both agree in every cycle.
//!
//! The program under test runs as the instance `"dut_inst"` of its entry
//! block. Requirement names are mapped to expressions over that instance by a
//! mapping file with lines `name = expr`; unmapped names default to
//! `"dut_inst".name`.

use std::fmt::Write;

use super::{
    compile_cem, compile_io_matrix, compile_logic_diagram, compile_state_machine, Monitor, RequirementError,
    RequirementSpec,
};
use crate::st::printer::{ident, print_expr};
use crate::st::{parse_expr_at, BinOp, Expr, Span, VarRef};

pub const DUT_INSTANCE: &str = "dut_inst";
pub const WRAPPER_BLOCK: &str = "req_check";
pub const MONITOR_BLOCK: &str = "req_monitor";
const MONITOR_INSTANCE: &str = "mon";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mapping {
    entries: Vec<(String, Expr)>,
}

impl Mapping {
    pub fn get(&self, name: &str) -> Expr {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| e.clone())
            .unwrap_or_else(|| Expr::Var(VarRef::new([DUT_INSTANCE, name])))
    }

    /// `e` with every requirement name replaced by its mapped expression.
    pub fn apply(&self, e: &Expr) -> Expr {
        e.map_vars(&mut |v| self.get(&v.to_string()))
    }
}

pub fn parse_mapping(text: &str) -> Result<Mapping, RequirementError> {
    let mut entries: Vec<(String, Expr)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| RequirementError::Syntax { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (name, expr) = trimmed
            .split_once('=')
            .ok_or_else(|| err("expected `name = expression`".into()))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(err("missing name before `=`".into()));
        }
        if entries.iter().any(|(n, _)| n == name) {
            return Err(err(format!("`{name}` mapped twice")));
        }
        let expr_text = expr.trim();
        let col = raw.find(expr_text).unwrap_or(0) + 1;
        let expr = parse_expr_at(expr_text, Span::new(line as u32, col as u32)).map_err(|e| err(e.to_string()))?;
        entries.push((name.to_string(), expr));
    }
    Ok(Mapping { entries })
}

/// Generated wrapper source; `entry` is the block to verify.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wrapper {
    pub source: String,
    pub entry: String,
    pub assertions: Vec<String>,
}

fn assertion_name(prefix: &str, name: &str) -> String {
    let clean: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    format!("{prefix}{clean}")
}

/// Prints `l = r` with compound sides parenthesized, for readability.
fn print_assertion(e: &Expr) -> String {
    let side = |x: &Expr| match x {
        Expr::Binary(..) => format!("({})", print_expr(x)),
        _ => print_expr(x),
    };
    match e {
        Expr::Binary(BinOp::Eq, l, r) => format!("{} = {}", side(l), side(r)),
        other => print_expr(other),
    }
}

/// Builds a wrapper checking `spec` against the block `dut_block`.
/// `require_well_formed` rejects nondeterministic or incomplete state machines.
pub fn build_wrapper(
    spec: &RequirementSpec,
    dut_block: &str,
    mapping: &Mapping,
    require_well_formed: bool,
) -> Result<Wrapper, RequirementError> {
    let mut monitor: Option<Monitor> = None;
    let mut asserts: Vec<(String, Expr)> = Vec::new();
    let mon_out = |o: &str| Expr::Var(VarRef::new([MONITOR_INSTANCE, o]));
    match spec {
        RequirementSpec::Cem(t) => {
            for (out, f) in compile_cem(t)? {
                asserts.push((
                    assertion_name("req_", &out),
                    Expr::eq(mapping.get(&out), mapping.apply(&f)),
                ));
            }
        }
        RequirementSpec::Logic(ds) => {
            for d in ds {
                let (out, f) = compile_logic_diagram(d);
                asserts.push((
                    assertion_name("req_", &out),
                    Expr::eq(mapping.get(&out), mapping.apply(&f)),
                ));
            }
        }
        RequirementSpec::Assertion { name, expr } => {
            asserts.push((assertion_name("", name), mapping.apply(expr)));
        }
        RequirementSpec::IoMatrix(m) => {
            let mon = compile_io_matrix(m, MONITOR_BLOCK)?;
            for out in &mon.outputs {
                asserts.push((assertion_name("req_", out), Expr::eq(mon_out(out), mapping.get(out))));
            }
            monitor = Some(mon);
        }
        RequirementSpec::StateMachine(s) => {
            let mon = compile_state_machine(s, MONITOR_BLOCK, require_well_formed)?;
            for (k, state) in s.states.iter().enumerate() {
                let in_state = Expr::binary(BinOp::Eq, mon_out("state"), Expr::Int(k as i64));
                asserts.push((
                    assertion_name("req_state_", state),
                    Expr::eq(in_state, mapping.get(state)),
                ));
            }
            monitor = Some(mon);
        }
    }

    let mut s = String::new();
    if let Some(m) = &monitor {
        s.push_str(&m.source);
        s.push('\n');
    }
    writeln!(
        s,
        "DATA_BLOCK \"{DUT_INSTANCE}\" {}\nBEGIN\nEND_DATA_BLOCK\n",
        ident(dut_block)
    )
    .unwrap();
    writeln!(s, "FUNCTION_BLOCK {WRAPPER_BLOCK}").unwrap();
    if monitor.is_some() {
        writeln!(s, "    VAR\n        {MONITOR_INSTANCE} : {MONITOR_BLOCK};\n    END_VAR").unwrap();
    }
    s.push_str("BEGIN\n");
    writeln!(s, "    {}.\"{DUT_INSTANCE}\"();", ident(dut_block)).unwrap();
    if let Some(m) = &monitor {
        let args: Vec<String> = m
            .inputs
            .iter()
            .map(|i| format!("{} := {}", ident(i), print_expr(&mapping.get(i))))
            .collect();
        writeln!(s, "    {MONITOR_INSTANCE}({});", args.join(", ")).unwrap();
    }
    for (name, e) in &asserts {
        writeln!(s, "    //#ASSERT({}) : {name};", print_assertion(e)).unwrap();
    }
    s.push_str("END_FUNCTION_BLOCK\n");
    Ok(Wrapper {
        source: s,
        entry: WRAPPER_BLOCK.to_string(),
        assertions: asserts.into_iter().map(|(n, _)| n).collect(),
    })
}
