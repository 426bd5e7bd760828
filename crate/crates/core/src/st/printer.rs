//! Pretty-printer. Output reparses to a structurally identical tree.

use std::fmt::Write;

use super::ast::*;
use super::lexer::is_keyword;
use super::Span;

/// Identifier text, quoted when it would not lex back as a bare identifier.
pub fn ident(name: &str) -> String {
    let bare = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_keyword(name);
    if bare {
        name.to_string()
    } else {
        format!("\"{name}\"")
    }
}

pub fn var_ref(v: &VarRef) -> String {
    v.parts.iter().map(|p| ident(p)).collect::<Vec<_>>().join(".")
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

fn write_expr(out: &mut String, e: &Expr, parent_prec: u8) {
    match e {
        Expr::Bool(true) => out.push_str("TRUE"),
        Expr::Bool(false) => out.push_str("FALSE"),
        Expr::Int(v) => write!(out, "{v}").unwrap(),
        Expr::Time(ms) => write!(out, "T#{ms}ms").unwrap(),
        Expr::Var(v) => out.push_str(&var_ref(v)),
        Expr::Unary(op, inner) => {
            out.push_str(match op {
                UnOp::Not => "NOT ",
                UnOp::Neg => "-",
            });
            // operands of unary operators are parenthesised unless atomic
            let atomic = matches!(
                **inner,
                Expr::Bool(_) | Expr::Int(_) | Expr::Time(_) | Expr::Var(_) | Expr::Unary(..)
            );
            if atomic {
                write_expr(out, inner, 0);
            } else {
                out.push('(');
                write_expr(out, inner, 0);
                out.push(')');
            }
        }
        Expr::Binary(op, l, r) => {
            let prec = op.precedence();
            let paren = prec < parent_prec;
            if paren {
                out.push('(');
            }
            let (lp, rp) = if *op == BinOp::Implies {
                (prec + 1, prec)
            } else {
                (prec, prec + 1)
            };
            write_expr(out, l, lp);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr(out, r, rp);
            if paren {
                out.push(')');
            }
        }
    }
}

pub fn print_unit(unit: &SourceUnit) -> String {
    let mut out = String::new();
    for (i, item) in unit.items.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match item {
            Item::FunctionBlock(fb) => print_block(&mut out, fb),
            Item::DataBlock(db) => print_data_block(&mut out, db),
        }
    }
    out
}

fn print_data_block(out: &mut String, db: &DataBlockDecl) {
    writeln!(out, "DATA_BLOCK \"{}\" {}", db.name, ident(&db.block_type)).unwrap();
    out.push_str("BEGIN\n");
    for (field, value) in &db.inits {
        writeln!(out, "    {} := {};", ident(field), print_expr(value)).unwrap();
    }
    out.push_str("END_DATA_BLOCK\n");
}

fn print_block(out: &mut String, fb: &FunctionBlockDecl) {
    writeln!(out, "FUNCTION_BLOCK {}", ident(&fb.name)).unwrap();
    for section in &fb.sections {
        let head = match section.kind {
            VarKind::Input => "VAR_INPUT",
            VarKind::Output => "VAR_OUTPUT",
            VarKind::Local => "VAR",
        };
        writeln!(out, "    {head}").unwrap();
        for decl in &section.decls {
            let ty = match &decl.ty {
                TypeRef::Block(name) => ident(name),
                other => other.to_string(),
            };
            write!(out, "        {} : {ty}", ident(&decl.name)).unwrap();
            if let Some(init) = &decl.init {
                write!(out, " := {}", print_expr(init)).unwrap();
            }
            out.push_str(";\n");
        }
        out.push_str("    END_VAR\n");
    }
    for r in &fb.ranges {
        writeln!(out, "    //#RANGE({}, {}, {})", ident(&r.var), r.lo, r.hi).unwrap();
    }
    out.push_str("BEGIN\n");
    print_stmts(out, &fb.body, 1);
    out.push_str("END_FUNCTION_BLOCK\n");
}

fn print_stmts(out: &mut String, stmts: &[Stmt], depth: usize) {
    for stmt in stmts {
        print_stmt(out, stmt, depth);
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn print_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    indent(out, depth);
    match &stmt.kind {
        StmtKind::Assign { target, value } => {
            writeln!(out, "{} := {};", var_ref(target), print_expr(value)).unwrap();
        }
        StmtKind::Call { callee, args } => {
            let args: Vec<String> = args
                .iter()
                .map(|a| format!("{} := {}", ident(&a.name), print_expr(&a.value)))
                .collect();
            writeln!(out, "{}({});", var_ref(callee), args.join(", ")).unwrap();
        }
        StmtKind::Pragma(p) => {
            let kw = match p.kind {
                PragmaKind::Assert => "ASSERT",
                PragmaKind::Assume => "ASSUME",
            };
            writeln!(out, "//#{kw}({}) : {};", print_expr(&p.expr), p.name).unwrap();
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            writeln!(out, "IF {} THEN", print_expr(cond)).unwrap();
            print_stmts(out, then_branch, depth + 1);
            let mut tail = else_branch;
            loop {
                match tail.as_slice() {
                    [] => break,
                    [Stmt {
                        kind:
                            StmtKind::If {
                                cond,
                                then_branch,
                                else_branch,
                            },
                        ..
                    }] => {
                        indent(out, depth);
                        writeln!(out, "ELSIF {} THEN", print_expr(cond)).unwrap();
                        print_stmts(out, then_branch, depth + 1);
                        tail = else_branch;
                    }
                    stmts => {
                        indent(out, depth);
                        out.push_str("ELSE\n");
                        print_stmts(out, stmts, depth + 1);
                        break;
                    }
                }
            }
            indent(out, depth);
            out.push_str("END_IF;\n");
        }
    }
}

/// Resets every source position, for comparing trees parsed from different text.
pub fn erase_spans(unit: &SourceUnit) -> Vec<Item> {
    let zero = Span::default();
    let mut items = unit.items.clone();
    for item in &mut items {
        match item {
            Item::DataBlock(db) => db.span = zero,
            Item::FunctionBlock(fb) => {
                fb.span = zero;
                for section in &mut fb.sections {
                    for d in &mut section.decls {
                        d.span = zero;
                    }
                }
                for r in &mut fb.ranges {
                    r.span = zero;
                }
                erase_stmt_spans(&mut fb.body);
            }
        }
    }
    items
}

fn erase_stmt_spans(stmts: &mut [Stmt]) {
    for stmt in stmts {
        stmt.span = Span::default();
        match &mut stmt.kind {
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                erase_stmt_spans(then_branch);
                erase_stmt_spans(else_branch);
            }
            StmtKind::Pragma(p) => p.span = Span::default(),
            _ => {}
        }
    }
}
