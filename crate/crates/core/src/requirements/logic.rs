//! Logic diagrams written as prefix gate expressions, `Out = AND(OR(a,b),c)`.

use super::RequirementError;
use crate::st::{BinOp, Expr};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    Input(String),
    Not(Box<Gate>),
    And(Vec<Gate>),
    Or(Vec<Gate>),
}

impl Gate {
    pub fn flatten(&self) -> Expr {
        match self {
            Gate::Input(name) => Expr::var(name),
            Gate::Not(g) => Expr::not(g.flatten()),
            Gate::And(gs) => Expr::fold(BinOp::And, gs.iter().map(Gate::flatten)).expect("non-empty gate"),
            Gate::Or(gs) => Expr::fold(BinOp::Or, gs.iter().map(Gate::flatten)).expect("non-empty gate"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicDiagram {
    pub output: String,
    pub tree: Gate,
}

pub fn compile_logic_diagram(d: &LogicDiagram) -> (String, Expr) {
    (d.output.clone(), d.tree.flatten())
}

/// One diagram per non-empty line; `#` starts a comment.
pub fn parse_logic(text: &str) -> Result<Vec<LogicDiagram>, RequirementError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| RequirementError::Syntax { line, message };
        let (output, tree) = body
            .split_once('=')
            .ok_or_else(|| err("expected `Output = GATE(...)`".into()))?;
        let output = output.trim();
        if !is_name(output) {
            return Err(err(format!("`{output}` is not a valid output name")));
        }
        let mut p = GateParser {
            chars: tree.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        };
        let tree = p.gate().map_err(err)?;
        if p.pos != p.chars.len() {
            return Err(err("trailing text after gate expression".into()));
        }
        out.push(LogicDiagram {
            output: output.to_string(),
            tree,
        });
    }
    if out.is_empty() {
        return Err(RequirementError::Syntax {
            line: 0,
            message: "no diagrams".into(),
        });
    }
    Ok(out)
}

fn is_name(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct GateParser {
    chars: Vec<char>,
    pos: usize,
}

impl GateParser {
    fn name(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.chars.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn gate(&mut self) -> Result<Gate, String> {
        let name = self.name();
        if !is_name(&name) {
            return Err(format!("expected a gate or input name at offset {}", self.pos));
        }
        if !self.eat('(') {
            return Ok(Gate::Input(name));
        }
        let mut args = vec![self.gate()?];
        while self.eat(',') {
            args.push(self.gate()?);
        }
        if !self.eat(')') {
            return Err(format!("expected `)` after arguments of {name}"));
        }
        match name.to_ascii_uppercase().as_str() {
            "AND" if args.len() >= 2 => Ok(Gate::And(args)),
            "OR" if args.len() >= 2 => Ok(Gate::Or(args)),
            "NOT" if args.len() == 1 => Ok(Gate::Not(Box::new(args.remove(0)))),
            "AND" | "OR" => Err(format!("{name} needs at least two inputs")),
            "NOT" => Err("NOT takes exactly one input".into()),
            _ => Err(format!("unknown gate `{name}`")),
        }
    }
}
