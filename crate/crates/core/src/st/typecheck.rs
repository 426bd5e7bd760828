//! Name resolution and type checking over a set of parsed source units.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use super::ast::*;
use super::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueType {
    Bool,
    Int,
    Time,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::Bool => "BOOL",
            ValueType::Int => "INT",
            ValueType::Time => "TIME",
        })
    }
}

impl ValueType {
    fn numeric(self) -> bool {
        matches!(self, ValueType::Int | ValueType::Time)
    }

    /// Whether a value of type `value` may be stored in a slot of this type.
    /// INT converts implicitly to TIME (milliseconds), as in `PT := 2*200`.
    pub fn accepts(self, value: ValueType) -> bool {
        self == value || (self == ValueType::Time && value == ValueType::Int)
    }
}

/// Closed integer interval a variable ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntDomain {
    pub lo: i64,
    pub hi: i64,
    /// Set by a `//#RANGE` pragma rather than defaulted.
    pub explicit: bool,
}

impl IntDomain {
    pub const DEFAULT: IntDomain = IntDomain {
        lo: 0,
        hi: 255,
        explicit: false,
    };

    pub fn clamp(&self, v: i64) -> i64 {
        v.clamp(self.lo, self.hi)
    }

    pub fn size(&self) -> u64 {
        (self.hi - self.lo) as u64 + 1
    }
}

/// Built-in function blocks with native semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Ton,
    Ctud,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Builtin> {
        match name.to_ascii_uppercase().as_str() {
            "TON" => Some(Builtin::Ton),
            "CTUD" => Some(Builtin::Ctud),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Ton => "TON",
            Builtin::Ctud => "CTUD",
        }
    }

    pub fn fields(self) -> &'static [(&'static str, VarKind, ValueType)] {
        match self {
            Builtin::Ton => &[
                ("IN", VarKind::Input, ValueType::Bool),
                ("PT", VarKind::Input, ValueType::Time),
                ("Q", VarKind::Output, ValueType::Bool),
                ("ET", VarKind::Output, ValueType::Time),
            ],
            Builtin::Ctud => &[
                ("CU", VarKind::Input, ValueType::Bool),
                ("CD", VarKind::Input, ValueType::Bool),
                ("R", VarKind::Input, ValueType::Bool),
                ("LD", VarKind::Input, ValueType::Bool),
                ("PV", VarKind::Input, ValueType::Int),
                ("QU", VarKind::Output, ValueType::Bool),
                ("QD", VarKind::Output, ValueType::Bool),
                ("CV", VarKind::Output, ValueType::Int),
            ],
        }
    }

    pub fn field(self, name: &str) -> Option<(VarKind, ValueType)> {
        self.fields()
            .iter()
            .find(|(n, _, _)| *n == name)
            .map(|(_, k, t)| (*k, *t))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("unresolved identifier `{name}`")]
    UnresolvedIdentifier { path: String, span: Span, name: String },
    #[error("type mismatch: {message}")]
    TypeMismatch { path: String, span: Span, message: String },
    #[error("duplicate declaration of `{name}`")]
    DuplicateDeclaration { path: String, span: Span, name: String },
    #[error("unknown instance `{name}`")]
    UnknownInstance { path: String, span: Span, name: String },
}

impl TypeError {
    pub fn path(&self) -> &str {
        match self {
            TypeError::UnresolvedIdentifier { path, .. }
            | TypeError::TypeMismatch { path, .. }
            | TypeError::DuplicateDeclaration { path, .. }
            | TypeError::UnknownInstance { path, .. } => path,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            TypeError::UnresolvedIdentifier { span, .. }
            | TypeError::TypeMismatch { span, .. }
            | TypeError::DuplicateDeclaration { span, .. }
            | TypeError::UnknownInstance { span, .. } => *span,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            TypeError::UnresolvedIdentifier { .. } => "unresolved-identifier",
            TypeError::TypeMismatch { .. } => "type-mismatch",
            TypeError::DuplicateDeclaration { .. } => "duplicate-declaration",
            TypeError::UnknownInstance { .. } => "unknown-instance",
        }
    }
}

/// Expression-level failure, before a source position is attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprError {
    Unresolved(String),
    Mismatch(String),
}

impl ExprError {
    fn at(self, path: &str, span: Span) -> TypeError {
        match self {
            ExprError::Unresolved(name) => TypeError::UnresolvedIdentifier {
                path: path.to_string(),
                span,
                name,
            },
            ExprError::Mismatch(message) => TypeError::TypeMismatch {
                path: path.to_string(),
                span,
                message,
            },
        }
    }
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::Unresolved(name) => write!(f, "unresolved identifier `{name}`"),
            ExprError::Mismatch(msg) => write!(f, "type mismatch: {msg}"),
        }
    }
}

/// Types `expr`, resolving variables through `lookup`.
pub fn type_of(expr: &Expr, lookup: &dyn Fn(&VarRef) -> Result<ValueType, ExprError>) -> Result<ValueType, ExprError> {
    use ValueType::*;
    match expr {
        Expr::Bool(_) => Ok(Bool),
        Expr::Int(_) => Ok(Int),
        Expr::Time(_) => Ok(Time),
        Expr::Var(v) => lookup(v),
        Expr::Unary(UnOp::Not, e) => match type_of(e, lookup)? {
            Bool => Ok(Bool),
            t => Err(ExprError::Mismatch(format!("NOT applied to {t}"))),
        },
        Expr::Unary(UnOp::Neg, e) => match type_of(e, lookup)? {
            Bool => Err(ExprError::Mismatch("negation applied to BOOL".into())),
            t => Ok(t),
        },
        Expr::Binary(op, l, r) => {
            let lt = type_of(l, lookup)?;
            let rt = type_of(r, lookup)?;
            let mismatch = || {
                Err(ExprError::Mismatch(format!(
                    "operator {} cannot combine {lt} and {rt}",
                    op.symbol()
                )))
            };
            match op {
                BinOp::Implies | BinOp::Or | BinOp::Xor | BinOp::And => {
                    if lt == Bool && rt == Bool {
                        Ok(Bool)
                    } else {
                        mismatch()
                    }
                }
                BinOp::Eq | BinOp::Ne => {
                    if lt == rt || (lt.numeric() && rt.numeric()) {
                        Ok(Bool)
                    } else {
                        mismatch()
                    }
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    if lt.numeric() && rt.numeric() {
                        Ok(Bool)
                    } else {
                        mismatch()
                    }
                }
                BinOp::Add | BinOp::Sub => match (lt, rt) {
                    (Int, Int) => Ok(Int),
                    (Time, Time) | (Time, Int) | (Int, Time) => Ok(Time),
                    _ => mismatch(),
                },
                BinOp::Mul => match (lt, rt) {
                    (Int, Int) => Ok(Int),
                    (Time, Int) | (Int, Time) => Ok(Time),
                    _ => mismatch(),
                },
                BinOp::Div => match (lt, rt) {
                    (Int, Int) => Ok(Int),
                    _ => mismatch(),
                },
            }
        }
    }
}

/// A pragma together with the block that contains it.
#[derive(Debug, Clone, PartialEq)]
pub struct PragmaSite {
    pub block: String,
    /// Pre-order index of the pragma statement within the block body.
    pub location: usize,
    pub pragma: Pragma,
}

/// What a dotted path denotes inside some block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolved {
    Value { ty: ValueType, writable: bool },
    Instance(String),
}

/// Fully resolved program: every name bound, every expression typed.
#[derive(Debug, Clone)]
pub struct TypedProgram {
    pub blocks: Vec<FunctionBlockDecl>,
    pub instances: Vec<DataBlockDecl>,
    pub pragmas: Vec<PragmaSite>,
    /// Source path of each entry in `blocks`.
    pub block_paths: Vec<String>,
    domains: HashMap<(String, String), IntDomain>,
}

impl TypedProgram {
    pub fn block(&self, name: &str) -> Option<&FunctionBlockDecl> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn instance(&self, name: &str) -> Option<&DataBlockDecl> {
        self.instances.iter().find(|d| d.name == name)
    }

    /// Blocks never instantiated by another block or data block.
    pub fn entry_candidates(&self) -> Vec<&str> {
        let mut used: HashSet<&str> = self.instances.iter().map(|d| d.block_type.as_str()).collect();
        for b in &self.blocks {
            for (_, d) in b.vars() {
                if let TypeRef::Block(t) = &d.ty {
                    used.insert(t.as_str());
                }
            }
        }
        self.blocks
            .iter()
            .map(|b| b.name.as_str())
            .filter(|n| !used.contains(n))
            .collect()
    }

    /// Integer domain of `var` in `block`: the `//#RANGE` override, else the
    /// default for INT variables. TIME variables only have an explicit one.
    pub fn domain(&self, block: &str, var: &str) -> Option<IntDomain> {
        if let Some(d) = self.domains.get(&(block.to_string(), var.to_string())) {
            return Some(*d);
        }
        let fb = self.block(block)?;
        match &fb.var(var)?.1.ty {
            TypeRef::Int => Some(IntDomain::DEFAULT),
            TypeRef::Block(t) if Builtin::from_name(t) == Some(Builtin::Ctud) => Some(IntDomain::DEFAULT),
            _ => None,
        }
    }

    pub fn pragmas_of<'a>(&'a self, block: &'a str) -> impl Iterator<Item = &'a PragmaSite> + 'a {
        self.pragmas.iter().filter(move |p| p.block == block)
    }

    /// Resolves `parts` as seen from inside `block`.
    pub fn resolve(&self, block: &str, parts: &[String]) -> Result<Resolved, ExprError> {
        let fb = self
            .block(block)
            .ok_or_else(|| ExprError::Unresolved(block.to_string()))?;
        let full = || parts.join(".");
        let (first, rest) = parts
            .split_first()
            .ok_or_else(|| ExprError::Unresolved(String::new()))?;
        let mut current = if let Some((_, decl)) = fb.var(first) {
            match &decl.ty {
                TypeRef::Bool => Resolved::Value {
                    ty: ValueType::Bool,
                    writable: true,
                },
                TypeRef::Int => Resolved::Value {
                    ty: ValueType::Int,
                    writable: true,
                },
                TypeRef::Time => Resolved::Value {
                    ty: ValueType::Time,
                    writable: true,
                },
                TypeRef::Block(t) => Resolved::Instance(t.clone()),
            }
        } else if let Some(db) = self.instance(first) {
            Resolved::Instance(db.block_type.clone())
        } else {
            return Err(ExprError::Unresolved(full()));
        };
        for part in rest {
            let Resolved::Instance(block_type) = &current else {
                return Err(ExprError::Mismatch(format!("`{}` is not an instance", full())));
            };
            current = self
                .field(block_type, part)
                .ok_or_else(|| ExprError::Unresolved(full()))?;
        }
        Ok(current)
    }

    fn field(&self, block_type: &str, name: &str) -> Option<Resolved> {
        if let Some(b) = Builtin::from_name(block_type) {
            let (_, ty) = b.field(name)?;
            return Some(Resolved::Value { ty, writable: false });
        }
        let fb = self.block(block_type)?;
        let (_, decl) = fb.var(name)?;
        Some(match &decl.ty {
            TypeRef::Bool => Resolved::Value {
                ty: ValueType::Bool,
                writable: true,
            },
            TypeRef::Int => Resolved::Value {
                ty: ValueType::Int,
                writable: true,
            },
            TypeRef::Time => Resolved::Value {
                ty: ValueType::Time,
                writable: true,
            },
            TypeRef::Block(t) => Resolved::Instance(t.clone()),
        })
    }

    /// Resolves a call target to the block type it instantiates.
    pub fn resolve_callee(&self, block: &str, callee: &VarRef) -> Result<String, ExprError> {
        let fb = self
            .block(block)
            .ok_or_else(|| ExprError::Unresolved(block.to_string()))?;
        // `Block."inst"()` form
        if let [ty, inst] = callee.parts.as_slice() {
            if fb.var(ty).is_none() && self.instance(ty).is_none() && self.is_block_type(ty) {
                let db = self
                    .instance(inst)
                    .ok_or_else(|| ExprError::Unresolved(callee.to_string()))?;
                if db.block_type != *ty {
                    return Err(ExprError::Mismatch(format!(
                        "`{inst}` is an instance of `{}`, not `{ty}`",
                        db.block_type
                    )));
                }
                return Ok(db.block_type.clone());
            }
        }
        match self.resolve(block, &callee.parts)? {
            Resolved::Instance(t) => Ok(t),
            Resolved::Value { .. } => Err(ExprError::Mismatch(format!(
                "`{callee}` is not a function block instance"
            ))),
        }
    }

    fn is_block_type(&self, name: &str) -> bool {
        self.block(name).is_some() || Builtin::from_name(name).is_some()
    }

    /// Input parameters of a block type, user-defined or built-in.
    pub fn block_inputs(&self, block_type: &str) -> Vec<(String, ValueType)> {
        if let Some(b) = Builtin::from_name(block_type) {
            return b
                .fields()
                .iter()
                .filter(|(_, k, _)| *k == VarKind::Input)
                .map(|(n, _, t)| (n.to_string(), *t))
                .collect();
        }
        self.block(block_type)
            .map(|fb| {
                fb.inputs()
                    .filter_map(|d| value_type(&d.ty).map(|t| (d.name.clone(), t)))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Types an expression as if it appeared inside `block`.
    pub fn type_in_block(&self, block: &str, expr: &Expr) -> Result<ValueType, ExprError> {
        type_of(expr, &|v: &VarRef| match self.resolve(block, &v.parts)? {
            Resolved::Value { ty, .. } => Ok(ty),
            Resolved::Instance(_) => Err(ExprError::Mismatch(format!("instance `{v}` used as a value"))),
        })
    }
}

pub fn value_type(ty: &TypeRef) -> Option<ValueType> {
    match ty {
        TypeRef::Bool => Some(ValueType::Bool),
        TypeRef::Int => Some(ValueType::Int),
        TypeRef::Time => Some(ValueType::Time),
        TypeRef::Block(_) => None,
    }
}

/// Binds every name across `units` and type-checks all statements and pragmas.
pub fn typecheck_and_resolve(units: &[SourceUnit]) -> Result<TypedProgram, TypeError> {
    let mut blocks = Vec::new();
    let mut block_paths = Vec::new();
    let mut instances: Vec<(String, DataBlockDecl)> = Vec::new();
    let mut seen: HashMap<String, ()> = HashMap::new();

    for unit in units {
        for item in &unit.items {
            let (name, span) = match item {
                Item::FunctionBlock(fb) => (&fb.name, fb.span),
                Item::DataBlock(db) => (&db.name, db.span),
            };
            if seen.insert(name.clone(), ()).is_some() || Builtin::from_name(name).is_some() {
                return Err(TypeError::DuplicateDeclaration {
                    path: unit.path.clone(),
                    span,
                    name: name.clone(),
                });
            }
            match item {
                Item::FunctionBlock(fb) => {
                    blocks.push(fb.clone());
                    block_paths.push(unit.path.clone());
                }
                Item::DataBlock(db) => instances.push((unit.path.clone(), db.clone())),
            }
        }
    }

    let mut program = TypedProgram {
        blocks,
        instances: instances.iter().map(|(_, d)| d.clone()).collect(),
        pragmas: Vec::new(),
        block_paths,
        domains: HashMap::new(),
    };

    for (path, db) in &instances {
        if !program.is_block_type(&db.block_type) {
            return Err(TypeError::UnknownInstance {
                path: path.clone(),
                span: db.span,
                name: db.block_type.clone(),
            });
        }
        for (field, value) in &db.inits {
            let Some(Resolved::Value { ty, .. }) = program.field(&db.block_type, field) else {
                return Err(TypeError::UnresolvedIdentifier {
                    path: path.clone(),
                    span: db.span,
                    name: format!("{}.{field}", db.name),
                });
            };
            check_constant(value, ty).map_err(|e| e.at(path, db.span))?;
        }
    }

    let mut pragmas = Vec::new();
    let mut domains = HashMap::new();
    for (fb, path) in program.blocks.iter().zip(&program.block_paths) {
        check_block(&program, fb, path, &mut pragmas, &mut domains)?;
    }
    program.pragmas = pragmas;
    program.domains = domains;
    Ok(program)
}

fn check_constant(value: &Expr, ty: ValueType) -> Result<(), ExprError> {
    if !value.vars().is_empty() {
        return Err(ExprError::Mismatch("initial values must be constant".into()));
    }
    let vt = type_of(value, &|v| Err(ExprError::Unresolved(v.to_string())))?;
    if !ty.accepts(vt) {
        return Err(ExprError::Mismatch(format!("cannot initialise {ty} with {vt}")));
    }
    Ok(())
}

fn check_block(
    program: &TypedProgram,
    fb: &FunctionBlockDecl,
    path: &str,
    pragmas: &mut Vec<PragmaSite>,
    domains: &mut HashMap<(String, String), IntDomain>,
) -> Result<(), TypeError> {
    let mut names = HashSet::new();
    for (_, decl) in fb.vars() {
        if !names.insert(decl.name.as_str()) {
            return Err(TypeError::DuplicateDeclaration {
                path: path.to_string(),
                span: decl.span,
                name: decl.name.clone(),
            });
        }
        match &decl.ty {
            TypeRef::Block(t) => {
                if !program.is_block_type(t) {
                    return Err(TypeError::UnresolvedIdentifier {
                        path: path.to_string(),
                        span: decl.span,
                        name: t.clone(),
                    });
                }
                if decl.init.is_some() {
                    return Err(TypeError::TypeMismatch {
                        path: path.to_string(),
                        span: decl.span,
                        message: format!("instance `{}` cannot have an initial value", decl.name),
                    });
                }
            }
            ty => {
                if let Some(init) = &decl.init {
                    let vt = value_type(ty).expect("value type");
                    check_constant(init, vt).map_err(|e| e.at(path, decl.span))?;
                }
            }
        }
    }

    for r in &fb.ranges {
        let Some((_, decl)) = fb.var(&r.var) else {
            return Err(TypeError::UnresolvedIdentifier {
                path: path.to_string(),
                span: r.span,
                name: r.var.clone(),
            });
        };
        let ranged = match &decl.ty {
            TypeRef::Int | TypeRef::Time => true,
            TypeRef::Block(t) => Builtin::from_name(t) == Some(Builtin::Ctud),
            TypeRef::Bool => false,
        };
        if !ranged || r.lo > r.hi {
            return Err(TypeError::TypeMismatch {
                path: path.to_string(),
                span: r.span,
                message: format!("invalid RANGE({}, {}, {})", r.var, r.lo, r.hi),
            });
        }
        let key = (fb.name.clone(), r.var.clone());
        let domain = IntDomain {
            lo: r.lo,
            hi: r.hi,
            explicit: true,
        };
        if domains.insert(key, domain).is_some() {
            return Err(TypeError::DuplicateDeclaration {
                path: path.to_string(),
                span: r.span,
                name: format!("RANGE({})", r.var),
            });
        }
    }

    let mut index = 0usize;
    let mut pragma_names = HashSet::new();
    let mut result = Ok(());
    walk_stmts(&fb.body, &mut |stmt| {
        let location = index;
        index += 1;
        if result.is_err() {
            return;
        }
        result = check_stmt(program, fb, path, stmt);
        if result.is_ok() {
            if let StmtKind::Pragma(p) = &stmt.kind {
                if !pragma_names.insert(p.name.clone()) {
                    result = Err(TypeError::DuplicateDeclaration {
                        path: path.to_string(),
                        span: stmt.span,
                        name: p.name.clone(),
                    });
                    return;
                }
                pragmas.push(PragmaSite {
                    block: fb.name.clone(),
                    location,
                    pragma: p.clone(),
                });
            }
        }
    });
    result
}

fn check_stmt(program: &TypedProgram, fb: &FunctionBlockDecl, path: &str, stmt: &Stmt) -> Result<(), TypeError> {
    let at = |e: ExprError| e.at(path, stmt.span);
    match &stmt.kind {
        StmtKind::Assign { target, value } => {
            let vt = program.type_in_block(&fb.name, value).map_err(at)?;
            match program.resolve(&fb.name, &target.parts).map_err(at)? {
                Resolved::Value { ty, writable } => {
                    if !writable {
                        return Err(at(ExprError::Mismatch(format!(
                            "`{target}` is a built-in block field and cannot be assigned"
                        ))));
                    }
                    if !ty.accepts(vt) {
                        return Err(at(ExprError::Mismatch(format!(
                            "cannot assign {vt} to `{target}` of type {ty}"
                        ))));
                    }
                }
                Resolved::Instance(_) => {
                    return Err(at(ExprError::Mismatch(format!("cannot assign to instance `{target}`"))))
                }
            }
        }
        StmtKind::If { cond, .. } => {
            let t = program.type_in_block(&fb.name, cond).map_err(at)?;
            if t != ValueType::Bool {
                return Err(at(ExprError::Mismatch(format!("IF condition has type {t}"))));
            }
        }
        StmtKind::Call { callee, args } => {
            let block_type = program.resolve_callee(&fb.name, callee).map_err(|e| match e {
                ExprError::Unresolved(name) => TypeError::UnknownInstance {
                    path: path.to_string(),
                    span: stmt.span,
                    name,
                },
                other => at(other),
            })?;
            let inputs = program.block_inputs(&block_type);
            let mut seen = HashSet::new();
            for arg in args {
                if !seen.insert(arg.name.as_str()) {
                    return Err(TypeError::DuplicateDeclaration {
                        path: path.to_string(),
                        span: stmt.span,
                        name: arg.name.clone(),
                    });
                }
                let Some((_, ty)) = inputs.iter().find(|(n, _)| *n == arg.name) else {
                    return Err(TypeError::UnresolvedIdentifier {
                        path: path.to_string(),
                        span: stmt.span,
                        name: format!("{block_type}.{}", arg.name),
                    });
                };
                let vt = program.type_in_block(&fb.name, &arg.value).map_err(at)?;
                if !ty.accepts(vt) {
                    return Err(at(ExprError::Mismatch(format!(
                        "argument `{}` expects {ty}, got {vt}",
                        arg.name
                    ))));
                }
            }
        }
        StmtKind::Pragma(p) => {
            let t = program.type_in_block(&fb.name, &p.expr).map_err(at)?;
            if t != ValueType::Bool {
                return Err(at(ExprError::Mismatch(format!(
                    "pragma `{}` has type {t}, expected BOOL",
                    p.name
                ))));
            }
        }
    }
    Ok(())
}

/// Sorted list of (block, var) pairs that carry an explicit RANGE, for reports.
pub fn explicit_ranges(program: &TypedProgram) -> BTreeMap<(String, String), IntDomain> {
    program.domains.iter().map(|(k, v)| (k.clone(), *v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::st::parser::parse_source;

    fn check(sources: &[(&str, &str)]) -> Result<TypedProgram, TypeError> {
        let units: Vec<_> = sources.iter().map(|(p, t)| parse_source(p, t).unwrap()).collect();
        typecheck_and_resolve(&units)
    }

    const FDBACK: &str = include_str!("../../corpus/fdback_simplified.scl");
    const HARNESS: &str = include_str!("../../corpus/call_fdback_simplified.scl");

    #[test]
    fn fdback_with_harness() {
        let program = check(&[("fdback.scl", FDBACK), ("harness.scl", HARNESS)]).unwrap();
        assert_eq!(program.entry_candidates(), ["call_FDBACK_simplified"]);
        let names: Vec<_> = program.pragmas.iter().map(|p| p.pragma.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "assertion1",
                "assertion2",
                "assertion3",
                "assertion4",
                "assertion5",
                "assertion6"
            ]
        );
        assert_eq!(
            program.domain("call_FDBACK_simplified", "cycle"),
            Some(IntDomain::DEFAULT)
        );
    }

    #[test]
    fn unresolved_pragma_identifier() {
        let err = check(&[(
            "p.scl",
            "FUNCTION_BLOCK p\nBEGIN\n//#ASSERT(foo) : a;\nEND_FUNCTION_BLOCK",
        )])
        .unwrap_err();
        assert!(matches!(err, TypeError::UnresolvedIdentifier { ref name, .. } if name == "foo"));
        assert_eq!(err.span(), Span::new(3, 1));
    }

    #[test]
    fn bool_assigned_int() {
        let err = check(&[(
            "b.scl",
            "FUNCTION_BLOCK b VAR x : BOOL; END_VAR BEGIN x := 1; END_FUNCTION_BLOCK",
        )])
        .unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }));
    }

    #[test]
    fn int_converts_to_time_but_not_back() {
        check(&[(
            "t.scl",
            "FUNCTION_BLOCK t VAR p : TIME; END_VAR BEGIN p := 2*200; END_FUNCTION_BLOCK",
        )])
        .unwrap();
        let err = check(&[(
            "t.scl",
            "FUNCTION_BLOCK t VAR i : INT; END_VAR BEGIN i := T#1s; END_FUNCTION_BLOCK",
        )])
        .unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }));
        let err = check(&[(
            "t.scl",
            "FUNCTION_BLOCK t VAR p : TIME; END_VAR BEGIN p := T#1s / 2; END_FUNCTION_BLOCK",
        )])
        .unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }));
    }

    #[test]
    fn duplicates() {
        let err = check(&[(
            "d.scl",
            "FUNCTION_BLOCK d VAR x : BOOL; x : INT; END_VAR BEGIN END_FUNCTION_BLOCK",
        )])
        .unwrap_err();
        assert!(matches!(err, TypeError::DuplicateDeclaration { .. }));
        let err = check(&[
            ("a.scl", "FUNCTION_BLOCK f BEGIN END_FUNCTION_BLOCK"),
            ("b.scl", "FUNCTION_BLOCK f BEGIN END_FUNCTION_BLOCK"),
        ])
        .unwrap_err();
        assert_eq!(err.path(), "b.scl");
        let err = check(&[(
            "p.scl",
            "FUNCTION_BLOCK p BEGIN\n//#ASSERT(TRUE) : a;\n//#ASSERT(TRUE) : a;\nEND_FUNCTION_BLOCK",
        )])
        .unwrap_err();
        assert!(matches!(err, TypeError::DuplicateDeclaration { ref name, .. } if name == "a"));
    }

    #[test]
    fn unknown_instances() {
        let err = check(&[(
            "u.scl",
            "DATA_BLOCK \"i\" Missing BEGIN END_DATA_BLOCK\nFUNCTION_BLOCK f BEGIN END_FUNCTION_BLOCK",
        )])
        .unwrap_err();
        assert!(matches!(err, TypeError::UnknownInstance { .. }));
        let err = check(&[("u.scl", "FUNCTION_BLOCK f BEGIN nobody(); END_FUNCTION_BLOCK")]).unwrap_err();
        assert!(matches!(err, TypeError::UnknownInstance { .. }));
    }

    #[test]
    fn builtin_fields_are_read_only() {
        let err = check(&[(
            "r.scl",
            "FUNCTION_BLOCK r VAR t : TON; END_VAR BEGIN t.Q := TRUE; END_FUNCTION_BLOCK",
        )])
        .unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }));
        check(&[(
            "r.scl",
            "FUNCTION_BLOCK r VAR t : TON; x : BOOL; END_VAR BEGIN t(IN := TRUE, PT := T#1s); x := t.Q AND t.ET > T#0ms; END_FUNCTION_BLOCK",
        )])
        .unwrap();
    }

    #[test]
    fn call_arguments_are_checked() {
        let err = check(&[(
            "c.scl",
            "FUNCTION_BLOCK c VAR t : TON; END_VAR BEGIN t(IN := 3); END_FUNCTION_BLOCK",
        )])
        .unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }));
        let err = check(&[(
            "c.scl",
            "FUNCTION_BLOCK c VAR t : TON; END_VAR BEGIN t(Q := TRUE); END_FUNCTION_BLOCK",
        )])
        .unwrap_err();
        assert!(matches!(err, TypeError::UnresolvedIdentifier { .. }));
    }

    #[test]
    fn range_pragmas() {
        let p = check(&[(
            "r.scl",
            "FUNCTION_BLOCK r VAR_INPUT n : INT; END_VAR //#RANGE(n, -2, 3)\nBEGIN END_FUNCTION_BLOCK",
        )])
        .unwrap();
        assert_eq!(
            p.domain("r", "n"),
            Some(IntDomain {
                lo: -2,
                hi: 3,
                explicit: true
            })
        );
        let err = check(&[(
            "r.scl",
            "FUNCTION_BLOCK r VAR_INPUT b : BOOL; END_VAR //#RANGE(b, 0, 1)\nBEGIN END_FUNCTION_BLOCK",
        )])
        .unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }));
    }

    #[test]
    fn qualified_call_must_match_instance_type() {
        let err = check(&[(
            "q.scl",
            "DATA_BLOCK \"i\" f BEGIN END_DATA_BLOCK\nFUNCTION_BLOCK f BEGIN END_FUNCTION_BLOCK\n\
             FUNCTION_BLOCK g BEGIN END_FUNCTION_BLOCK\nFUNCTION_BLOCK h BEGIN g.\"i\"(); END_FUNCTION_BLOCK",
        )])
        .unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }));
    }
}
