//! Syntax tree shared by the parser, the type checker and the lowering pass.

use std::fmt;

use super::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitKind {
    FunctionBlock,
    DataBlock,
    Mixed,
}

/// One parsed `.scl` file.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
    pub kind: UnitKind,
    pub items: Vec<Item>,
}

impl SourceUnit {
    pub fn blocks(&self) -> impl Iterator<Item = &FunctionBlockDecl> {
        self.items.iter().filter_map(|item| match item {
            Item::FunctionBlock(fb) => Some(fb),
            Item::DataBlock(_) => None,
        })
    }

    pub fn data_blocks(&self) -> impl Iterator<Item = &DataBlockDecl> {
        self.items.iter().filter_map(|item| match item {
            Item::DataBlock(db) => Some(db),
            Item::FunctionBlock(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    FunctionBlock(FunctionBlockDecl),
    DataBlock(DataBlockDecl),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Input,
    Output,
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeRef {
    Bool,
    Int,
    Time,
    /// Instance of a function block (user-defined or built-in).
    Block(String),
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Bool => f.write_str("BOOL"),
            TypeRef::Int => f.write_str("INT"),
            TypeRef::Time => f.write_str("TIME"),
            TypeRef::Block(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub ty: TypeRef,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarSection {
    pub kind: VarKind,
    pub decls: Vec<VarDecl>,
}

/// `//#RANGE(var, lo, hi)`: overrides the integer domain of a variable.
#[derive(Debug, Clone, PartialEq)]
pub struct RangePragma {
    pub var: String,
    pub lo: i64,
    pub hi: i64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionBlockDecl {
    pub name: String,
    pub sections: Vec<VarSection>,
    pub ranges: Vec<RangePragma>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

impl FunctionBlockDecl {
    pub fn vars(&self) -> impl Iterator<Item = (VarKind, &VarDecl)> {
        self.sections
            .iter()
            .flat_map(|s| s.decls.iter().map(move |d| (s.kind, d)))
    }

    pub fn var(&self, name: &str) -> Option<(VarKind, &VarDecl)> {
        self.vars().find(|(_, d)| d.name == name)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &VarDecl> {
        self.vars().filter(|(k, _)| *k == VarKind::Input).map(|(_, d)| d)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &VarDecl> {
        self.vars().filter(|(k, _)| *k == VarKind::Output).map(|(_, d)| d)
    }
}

/// `DATA_BLOCK "inst" BlockType BEGIN ... END_DATA_BLOCK`
#[derive(Debug, Clone, PartialEq)]
pub struct DataBlockDecl {
    pub name: String,
    pub block_type: String,
    /// Optional initial-value overrides between `BEGIN` and `END_DATA_BLOCK`.
    pub inits: Vec<(String, Expr)>,
    pub span: Span,
}

/// Dotted reference such as `x`, `ET.Q` or `"inst".ERROR`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarRef {
    pub parts: Vec<String>,
}

impl VarRef {
    pub fn new<S: Into<String>>(parts: impl IntoIterator<Item = S>) -> Self {
        VarRef {
            parts: parts.into_iter().map(Into::into).collect(),
        }
    }

    pub fn simple(name: impl Into<String>) -> Self {
        VarRef {
            parts: vec![name.into()],
        }
    }

    pub fn prefixed(&self, prefix: &str) -> Self {
        let mut parts = Vec::with_capacity(self.parts.len() + 1);
        parts.push(prefix.to_string());
        parts.extend(self.parts.iter().cloned());
        VarRef { parts }
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.parts.join("."))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Implies,
    Or,
    Xor,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::Xor => 3,
            BinOp::And => 4,
            BinOp::Eq | BinOp::Ne => 5,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 6,
            BinOp::Add | BinOp::Sub => 7,
            BinOp::Mul | BinOp::Div => 8,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Implies => "-->",
            BinOp::Or => "OR",
            BinOp::Xor => "XOR",
            BinOp::And => "AND",
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    /// Duration in milliseconds.
    Time(i64),
    Var(VarRef),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(VarRef::simple(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn and(l: Expr, r: Expr) -> Expr {
        Expr::binary(BinOp::And, l, r)
    }

    pub fn or(l: Expr, r: Expr) -> Expr {
        Expr::binary(BinOp::Or, l, r)
    }

    pub fn eq(l: Expr, r: Expr) -> Expr {
        Expr::binary(BinOp::Eq, l, r)
    }

    /// Left-folds `items` with `op`; `None` when empty.
    pub fn fold(op: BinOp, items: impl IntoIterator<Item = Expr>) -> Option<Expr> {
        items.into_iter().reduce(|acc, e| Expr::binary(op, acc, e))
    }

    /// Every variable reference, in left-to-right order.
    pub fn vars(&self) -> Vec<&VarRef> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a VarRef>) {
        match self {
            Expr::Var(v) => out.push(v),
            Expr::Unary(_, e) => e.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Bool(_) | Expr::Int(_) | Expr::Time(_) => {}
        }
    }

    /// Rewrites every variable reference through `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(&VarRef) -> Expr) -> Expr {
        match self {
            Expr::Var(v) => f(v),
            Expr::Unary(op, e) => Expr::Unary(*op, Box::new(e.map_vars(f))),
            Expr::Binary(op, l, r) => Expr::Binary(*op, Box::new(l.map_vars(f)), Box::new(r.map_vars(f))),
            other => other.clone(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Unary(_, e) => 1 + e.depth(),
            Expr::Binary(_, l, r) => 1 + l.depth().max(r.depth()),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedArg {
    pub name: String,
    pub value: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PragmaKind {
    Assert,
    Assume,
}

/// `//#ASSERT(expr) : name;` or `//#ASSUME(expr) : name;` at a statement position.
#[derive(Debug, Clone, PartialEq)]
pub struct Pragma {
    pub kind: PragmaKind,
    pub name: String,
    pub expr: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign {
        target: VarRef,
        value: Expr,
    },
    /// `ELSIF` chains are stored as an `else_branch` holding a single nested `If`.
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    /// `inst(args)`, `Block."inst"(args)` or `local.sub(args)`.
    Call {
        callee: VarRef,
        args: Vec<NamedArg>,
    },
    Pragma(Pragma),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

impl Stmt {
    pub fn new(kind: StmtKind, span: Span) -> Self {
        Stmt { kind, span }
    }
}

/// Visits statements in pre-order, descending into `IF` branches.
pub fn walk_stmts<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for stmt in stmts {
        f(stmt);
        if let StmtKind::If {
            then_branch,
            else_branch,
            ..
        } = &stmt.kind
        {
            walk_stmts(then_branch, f);
            walk_stmts(else_branch, f);
        }
    }
}
