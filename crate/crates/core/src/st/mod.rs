//! Front end for the Structured Text (SCL) subset: lexer, parser, printer and
//! type checker.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod typecheck;

use std::fmt;

pub use ast::*;
pub use lexer::{lex, Token, TokenKind};
pub use parser::{parse, parse_expr, parse_expr_at, parse_source, ParseError};
pub use typecheck::{
    type_of, typecheck_and_resolve, value_type, Builtin, ExprError, IntDomain, PragmaSite, Resolved, TypeError,
    TypedProgram, ValueType,
};

/// 1-based line/column position in a source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub const fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// One `path:line:col: code: message` line on the error stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub span: Span,
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(path: impl Into<String>, span: Span, code: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            path: path.into(),
            span,
            code: code.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.span.line == 0 {
            // No source position, e.g. an error about the file as a whole.
            return write!(f, "{}: {}: {}", self.path, self.code, self.message);
        }
        write!(
            f,
            "{}:{}:{}: {}: {}",
            self.path, self.span.line, self.span.col, self.code, self.message
        )
    }
}
