//! Lowering of a typed program to a control-flow automaton. Calls to user
//! blocks are inlined; every variable of the instance tree becomes a slot.

use std::collections::HashMap;

use thiserror::Error;

use super::Value;
use crate::st::{
    BinOp, Builtin, Expr, IntDomain, PragmaKind, Span, Stmt, StmtKind, TypeRef, TypedProgram, UnOp, ValueType, VarRef,
};

pub type SlotId = usize;
pub type LocId = usize;

/// One storage cell of the flattened instance tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    /// Dotted path from the entry block, e.g. `ET.Q` or `FDBACK_simplified_inst.ERROR`.
    pub name: String,
    pub ty: ValueType,
    pub domain: Option<IntDomain>,
    pub init: Value,
    /// Edge memories of built-in blocks; kept out of counterexample diagrams.
    pub hidden: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimerInstance {
    Ton {
        name: String,
        input: SlotId,
        preset: SlotId,
        q: SlotId,
        et: SlotId,
        in_prev: SlotId,
    },
    Ctud {
        name: String,
        cu: SlotId,
        cd: SlotId,
        r: SlotId,
        ld: SlotId,
        pv: SlotId,
        qu: SlotId,
        qd: SlotId,
        cv: SlotId,
        cu_prev: SlotId,
        cd_prev: SlotId,
        domain: IntDomain,
    },
}

impl TimerInstance {
    pub fn name(&self) -> &str {
        match self {
            TimerInstance::Ton { name, .. } | TimerInstance::Ctud { name, .. } => name,
        }
    }
}

/// Expression with every variable bound to a slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RExpr {
    Const(Value),
    Slot(SlotId),
    Unary(UnOp, Box<RExpr>),
    Binary(BinOp, Box<RExpr>, Box<RExpr>),
}

impl RExpr {
    pub const TRUE: RExpr = RExpr::Const(Value::Bool(true));

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: RExpr) -> RExpr {
        RExpr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn slots(&self, out: &mut Vec<SlotId>) {
        match self {
            RExpr::Const(_) => {}
            RExpr::Slot(s) => out.push(*s),
            RExpr::Unary(_, e) => e.slots(out),
            RExpr::Binary(_, l, r) => {
                l.slots(out);
                r.slots(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Samples every cycle variable nondeterministically.
    Havoc,
    Assign(SlotId, RExpr),
    /// Runs one call of the built-in instance `timers[id]` on its current inputs.
    Step(usize),
    EndCycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocKind {
    CycleStart,
    Body,
    AssertionFailed(usize),
    AssumptionFailed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub kind: LocKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub src: LocId,
    pub dst: LocId,
    pub guard: RExpr,
    pub actions: Vec<Action>,
}

/// A named pragma of the verification model.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub kind: PragmaKind,
    pub expr: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputOrder {
    /// Declaration order of the inputs.
    #[default]
    Declaration,
    /// Alphabetical by slot name.
    Name,
}

#[derive(Debug, Clone)]
pub struct CycleAutomaton {
    pub entry: String,
    pub t_cycle: i64,
    pub slots: Vec<Slot>,
    /// Slots sampled nondeterministically at the start of every cycle.
    pub cycle_vars: Vec<SlotId>,
    pub timers: Vec<TimerInstance>,
    pub locations: Vec<Location>,
    pub initial: LocId,
    pub edges: Vec<Edge>,
    pub assertions: Vec<Assertion>,
    pub assumptions: Vec<Assertion>,
    outgoing: Vec<Vec<usize>>,
}

impl CycleAutomaton {
    pub fn outgoing(&self, loc: LocId) -> impl Iterator<Item = &Edge> {
        self.outgoing[loc].iter().map(move |&i| &self.edges[i])
    }

    pub fn initial_values(&self) -> Vec<Value> {
        self.slots.iter().map(|s| s.init).collect()
    }

    pub fn slot_by_name(&self, name: &str) -> Option<SlotId> {
        self.slots.iter().position(|s| s.name == name)
    }

    pub fn assertion_by_name(&self, name: &str) -> Option<usize> {
        self.assertions.iter().position(|a| a.name == name)
    }

    pub fn input_names(&self) -> Vec<&str> {
        self.cycle_vars.iter().map(|&s| self.slots[s].name.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error("no function block named `{0}`")]
    NoSuchEntry(String),
    #[error("function block `{0}` calls or instantiates itself")]
    RecursiveCall(String),
    #[error("cannot resolve `{0}`")]
    Unresolved(String),
    #[error("{0}")]
    Type(String),
}

/// Lowers `entry` with no extra assumptions and inputs in declaration order.
pub fn lower_to_cfa(program: &TypedProgram, entry: &str, t_cycle: i64) -> Result<CycleAutomaton, LowerError> {
    lower_with(program, entry, t_cycle, &[], InputOrder::Declaration)
}

/// Lowers `entry`; `assumptions` are checked right after the inputs are sampled.
pub fn lower_with(
    program: &TypedProgram,
    entry: &str,
    t_cycle: i64,
    assumptions: &[Expr],
    order: InputOrder,
) -> Result<CycleAutomaton, LowerError> {
    let fb = program
        .block(entry)
        .ok_or_else(|| LowerError::NoSuchEntry(entry.to_string()))?;
    let mut b = Builder {
        program,
        slots: Vec::new(),
        slot_index: HashMap::new(),
        timers: Vec::new(),
        timer_index: HashMap::new(),
        instance_types: HashMap::new(),
        globals: Vec::new(),
        locations: Vec::new(),
        edges: Vec::new(),
        assertions: Vec::new(),
        assumptions: Vec::new(),
        inst_stack: Vec::new(),
        call_stack: vec![entry.to_string()],
    };
    b.instantiate(entry, &[], None)?;

    let start = b.new_loc(LocKind::CycleStart);
    let body = b.new_loc(LocKind::Body);
    b.edge(start, body, RExpr::TRUE, vec![Action::Havoc]);

    let scope = Scope {
        block: entry.to_string(),
        prefix: Vec::new(),
    };
    let mut cur = body;
    for (i, expr) in assumptions.iter().enumerate() {
        let ty = program
            .type_in_block(entry, expr)
            .map_err(|e| LowerError::Type(format!("assumption `{}`: {e}", crate::st::printer::print_expr(expr))))?;
        if ty != ValueType::Bool {
            return Err(LowerError::Type(format!(
                "assumption `{}` has type {ty}",
                crate::st::printer::print_expr(expr)
            )));
        }
        let pragma = crate::st::Pragma {
            kind: PragmaKind::Assume,
            name: format!("case_assume{}", i + 1),
            expr: expr.clone(),
            span: Span::default(),
        };
        cur = b.lower_pragma(&scope, &pragma, cur)?;
    }
    let end = b.lower_stmts(&scope, &fb.body, cur)?;
    b.edge(end, start, RExpr::TRUE, vec![Action::EndCycle]);

    let mut cycle_vars: Vec<SlotId> = fb
        .inputs()
        .filter(|d| !matches!(d.ty, TypeRef::Block(_)))
        .map(|d| b.slot_index[&vec![d.name.clone()]])
        .collect();
    for db_name in &b.globals {
        let db = program.instance(db_name).expect("global instance");
        if let Some(block) = program.block(&db.block_type) {
            for d in block.inputs() {
                if matches!(d.ty, TypeRef::Block(_)) {
                    continue;
                }
                cycle_vars.push(b.slot_index[&vec![db_name.clone(), d.name.clone()]]);
            }
        }
    }
    if order == InputOrder::Name {
        cycle_vars.sort_by(|&a, &c| b.slots[a].name.cmp(&b.slots[c].name));
    }

    let mut outgoing = vec![Vec::new(); b.locations.len()];
    for (i, e) in b.edges.iter().enumerate() {
        outgoing[e.src].push(i);
    }
    Ok(CycleAutomaton {
        entry: entry.to_string(),
        t_cycle,
        slots: b.slots,
        cycle_vars,
        timers: b.timers,
        locations: b.locations,
        initial: start,
        edges: b.edges,
        assertions: b.assertions,
        assumptions: b.assumptions,
        outgoing,
    })
}

struct Scope {
    block: String,
    prefix: Vec<String>,
}

struct Builder<'p> {
    program: &'p TypedProgram,
    slots: Vec<Slot>,
    slot_index: HashMap<Vec<String>, SlotId>,
    timers: Vec<TimerInstance>,
    timer_index: HashMap<Vec<String>, usize>,
    instance_types: HashMap<Vec<String>, String>,
    /// Data-block instances in first-reference order.
    globals: Vec<String>,
    locations: Vec<Location>,
    edges: Vec<Edge>,
    assertions: Vec<Assertion>,
    assumptions: Vec<Assertion>,
    inst_stack: Vec<String>,
    call_stack: Vec<String>,
}

fn default_value(ty: ValueType, domain: Option<IntDomain>) -> Value {
    match ty {
        ValueType::Bool => Value::Bool(false),
        _ => Value::Int(domain.map_or(0, |d| d.clamp(0))),
    }
}

impl Builder<'_> {
    fn new_loc(&mut self, kind: LocKind) -> LocId {
        self.locations.push(Location { kind });
        self.locations.len() - 1
    }

    fn edge(&mut self, src: LocId, dst: LocId, guard: RExpr, actions: Vec<Action>) {
        self.edges.push(Edge {
            src,
            dst,
            guard,
            actions,
        });
    }

    fn add_slot(&mut self, path: Vec<String>, ty: ValueType, domain: Option<IntDomain>, hidden: bool) -> SlotId {
        let id = self.slots.len();
        self.slots.push(Slot {
            name: path.join("."),
            ty,
            domain,
            init: default_value(ty, domain),
            hidden,
        });
        self.slot_index.insert(path, id);
        id
    }

    fn instantiate(&mut self, block_type: &str, path: &[String], domain: Option<IntDomain>) -> Result<(), LowerError> {
        let sub = |name: &str| {
            let mut p = path.to_vec();
            p.push(name.to_string());
            p
        };
        match Builtin::from_name(block_type) {
            Some(Builtin::Ton) => {
                let timer = TimerInstance::Ton {
                    name: path.join("."),
                    input: self.add_slot(sub("IN"), ValueType::Bool, None, false),
                    preset: self.add_slot(sub("PT"), ValueType::Time, None, false),
                    q: self.add_slot(sub("Q"), ValueType::Bool, None, false),
                    et: self.add_slot(sub("ET"), ValueType::Time, None, false),
                    in_prev: self.add_slot(sub("IN_prev"), ValueType::Bool, None, true),
                };
                self.timer_index.insert(path.to_vec(), self.timers.len());
                self.timers.push(timer);
                return Ok(());
            }
            Some(Builtin::Ctud) => {
                let d = domain.unwrap_or(IntDomain::DEFAULT);
                let timer = TimerInstance::Ctud {
                    name: path.join("."),
                    cu: self.add_slot(sub("CU"), ValueType::Bool, None, false),
                    cd: self.add_slot(sub("CD"), ValueType::Bool, None, false),
                    r: self.add_slot(sub("R"), ValueType::Bool, None, false),
                    ld: self.add_slot(sub("LD"), ValueType::Bool, None, false),
                    pv: self.add_slot(sub("PV"), ValueType::Int, Some(d), false),
                    qu: self.add_slot(sub("QU"), ValueType::Bool, None, false),
                    qd: self.add_slot(sub("QD"), ValueType::Bool, None, false),
                    cv: self.add_slot(sub("CV"), ValueType::Int, Some(d), false),
                    cu_prev: self.add_slot(sub("CU_prev"), ValueType::Bool, None, true),
                    cd_prev: self.add_slot(sub("CD_prev"), ValueType::Bool, None, true),
                    domain: d,
                };
                if let TimerInstance::Ctud { qd, .. } = &timer {
                    // CV starts at the domain value closest to 0, so QD holds initially
                    self.slots[*qd].init = Value::Bool(d.clamp(0) <= 0);
                }
                self.timer_index.insert(path.to_vec(), self.timers.len());
                self.timers.push(timer);
                return Ok(());
            }
            None => {}
        }
        if self.inst_stack.iter().any(|b| b == block_type) {
            return Err(LowerError::RecursiveCall(block_type.to_string()));
        }
        let program = self.program;
        let fb = program
            .block(block_type)
            .ok_or_else(|| LowerError::Unresolved(block_type.to_string()))?;
        self.inst_stack.push(block_type.to_string());
        for (_, decl) in fb.vars() {
            let p = sub(&decl.name);
            match &decl.ty {
                TypeRef::Block(t) => {
                    self.instantiate(t, &p, program.domain(block_type, &decl.name))?;
                }
                ty => {
                    let ty = crate::st::value_type(ty).expect("value type");
                    let domain = program.domain(block_type, &decl.name);
                    let id = self.add_slot(p, ty, domain, false);
                    if let Some(init) = &decl.init {
                        self.slots[id].init = self.constant(init, ty, domain)?;
                    }
                }
            }
        }
        self.inst_stack.pop();
        self.instance_types.insert(path.to_vec(), block_type.to_string());
        Ok(())
    }

    fn constant(&self, e: &Expr, ty: ValueType, domain: Option<IntDomain>) -> Result<Value, LowerError> {
        let r = to_rexpr(e, &mut |v| Err(LowerError::Unresolved(v.to_string())))?;
        let v = super::sim::eval(&r, &[]);
        Ok(store(ty, domain, v))
    }

    fn ensure_global(&mut self, name: &str) -> Result<(), LowerError> {
        if self.globals.iter().any(|g| g == name) {
            return Ok(());
        }
        let program = self.program;
        let db = program
            .instance(name)
            .ok_or_else(|| LowerError::Unresolved(name.to_string()))?;
        self.globals.push(name.to_string());
        self.instantiate(&db.block_type, &[name.to_string()], None)?;
        for (field, value) in &db.inits {
            let path = vec![name.to_string(), field.clone()];
            let id = *self
                .slot_index
                .get(&path)
                .ok_or_else(|| LowerError::Unresolved(path.join(".")))?;
            let (ty, domain) = (self.slots[id].ty, self.slots[id].domain);
            self.slots[id].init = self.constant(value, ty, domain)?;
        }
        Ok(())
    }

    /// Absolute path of `parts` as seen from `scope`.
    fn absolute(&mut self, scope: &Scope, parts: &[String]) -> Result<Vec<String>, LowerError> {
        let program = self.program;
        let fb = program
            .block(&scope.block)
            .ok_or_else(|| LowerError::Unresolved(scope.block.clone()))?;
        let first = &parts[0];
        if fb.var(first).is_some() {
            let mut p = scope.prefix.clone();
            p.extend(parts.iter().cloned());
            Ok(p)
        } else if program.instance(first).is_some() {
            self.ensure_global(first)?;
            Ok(parts.to_vec())
        } else {
            Err(LowerError::Unresolved(parts.join(".")))
        }
    }

    fn slot(&mut self, scope: &Scope, v: &VarRef) -> Result<SlotId, LowerError> {
        let path = self.absolute(scope, &v.parts)?;
        self.slot_index
            .get(&path)
            .copied()
            .ok_or_else(|| LowerError::Unresolved(v.to_string()))
    }

    fn rexpr(&mut self, scope: &Scope, e: &Expr) -> Result<RExpr, LowerError> {
        to_rexpr(e, &mut |v| self.slot(scope, v))
    }

    fn callee_path(&mut self, scope: &Scope, callee: &VarRef) -> Result<Vec<String>, LowerError> {
        let program = self.program;
        if let [ty, inst] = callee.parts.as_slice() {
            let fb = program.block(&scope.block).expect("scope block");
            let is_type = program.block(ty).is_some() || Builtin::from_name(ty).is_some();
            if fb.var(ty).is_none() && program.instance(ty).is_none() && is_type {
                self.ensure_global(inst)?;
                return Ok(vec![inst.clone()]);
            }
        }
        self.absolute(scope, &callee.parts)
    }

    fn lower_stmts(&mut self, scope: &Scope, stmts: &[Stmt], mut cur: LocId) -> Result<LocId, LowerError> {
        for stmt in stmts {
            cur = self.lower_stmt(scope, stmt, cur)?;
        }
        Ok(cur)
    }

    fn lower_stmt(&mut self, scope: &Scope, stmt: &Stmt, cur: LocId) -> Result<LocId, LowerError> {
        match &stmt.kind {
            StmtKind::Assign { target, value } => {
                let slot = self.slot(scope, target)?;
                let value = self.rexpr(scope, value)?;
                let next = self.new_loc(LocKind::Body);
                self.edge(cur, next, RExpr::TRUE, vec![Action::Assign(slot, value)]);
                Ok(next)
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.rexpr(scope, cond)?;
                let then_loc = self.new_loc(LocKind::Body);
                let else_loc = self.new_loc(LocKind::Body);
                self.edge(cur, then_loc, c.clone(), Vec::new());
                self.edge(cur, else_loc, RExpr::not(c), Vec::new());
                let then_end = self.lower_stmts(scope, then_branch, then_loc)?;
                let else_end = self.lower_stmts(scope, else_branch, else_loc)?;
                let join = self.new_loc(LocKind::Body);
                self.edge(then_end, join, RExpr::TRUE, Vec::new());
                self.edge(else_end, join, RExpr::TRUE, Vec::new());
                Ok(join)
            }
            StmtKind::Call { callee, args } => {
                let path = self.callee_path(scope, callee)?;
                let mut actions = Vec::new();
                for arg in args {
                    let mut p = path.clone();
                    p.push(arg.name.clone());
                    let slot = *self
                        .slot_index
                        .get(&p)
                        .ok_or_else(|| LowerError::Unresolved(p.join(".")))?;
                    actions.push(Action::Assign(slot, self.rexpr(scope, &arg.value)?));
                }
                if let Some(&timer) = self.timer_index.get(&path) {
                    actions.push(Action::Step(timer));
                    let next = self.new_loc(LocKind::Body);
                    self.edge(cur, next, RExpr::TRUE, actions);
                    return Ok(next);
                }
                let block_type = self
                    .instance_types
                    .get(&path)
                    .cloned()
                    .ok_or_else(|| LowerError::Unresolved(callee.to_string()))?;
                if self.call_stack.contains(&block_type) {
                    return Err(LowerError::RecursiveCall(block_type));
                }
                let mut cur = cur;
                if !actions.is_empty() {
                    let next = self.new_loc(LocKind::Body);
                    self.edge(cur, next, RExpr::TRUE, actions);
                    cur = next;
                }
                let program = self.program;
                let fb = program.block(&block_type).expect("instance type");
                let inner = Scope {
                    block: block_type.clone(),
                    prefix: path,
                };
                self.call_stack.push(block_type);
                let end = self.lower_stmts(&inner, &fb.body, cur)?;
                self.call_stack.pop();
                Ok(end)
            }
            StmtKind::Pragma(p) => self.lower_pragma(scope, p, cur),
        }
    }

    fn lower_pragma(&mut self, scope: &Scope, p: &crate::st::Pragma, cur: LocId) -> Result<LocId, LowerError> {
        let e = self.rexpr(scope, &p.expr)?;
        let mut name = if scope.prefix.is_empty() {
            p.name.clone()
        } else {
            format!("{}.{}", scope.prefix.join("."), p.name)
        };
        let list = match p.kind {
            PragmaKind::Assert => &self.assertions,
            PragmaKind::Assume => &self.assumptions,
        };
        // an instance called twice contributes its pragmas twice
        let base = name.clone();
        let mut n = 1;
        while list.iter().any(|a| a.name == name) {
            n += 1;
            name = format!("{base}@{n}");
        }
        let entry = Assertion {
            name,
            kind: p.kind,
            expr: p.expr.clone(),
            span: p.span,
        };
        let fail_kind = match p.kind {
            PragmaKind::Assert => {
                self.assertions.push(entry);
                LocKind::AssertionFailed(self.assertions.len() - 1)
            }
            PragmaKind::Assume => {
                self.assumptions.push(entry);
                LocKind::AssumptionFailed(self.assumptions.len() - 1)
            }
        };
        let fail = self.new_loc(fail_kind);
        let next = self.new_loc(LocKind::Body);
        self.edge(cur, next, e.clone(), Vec::new());
        self.edge(cur, fail, RExpr::not(e), Vec::new());
        self.edge(fail, next, RExpr::TRUE, Vec::new());
        Ok(next)
    }
}

/// Converts `value` for storage in a slot of type `ty`: INT and TIME values
/// saturate at the slot's domain bounds.
pub fn store(ty: ValueType, domain: Option<IntDomain>, value: Value) -> Value {
    match ty {
        ValueType::Bool => Value::Bool(value.as_bool()),
        _ => {
            let v = value.as_int();
            Value::Int(domain.map_or(v, |d| d.clamp(v)))
        }
    }
}

/// Binds every variable of `e` through `lookup`.
pub fn to_rexpr(e: &Expr, lookup: &mut dyn FnMut(&VarRef) -> Result<SlotId, LowerError>) -> Result<RExpr, LowerError> {
    Ok(match e {
        Expr::Bool(b) => RExpr::Const(Value::Bool(*b)),
        Expr::Int(i) | Expr::Time(i) => RExpr::Const(Value::Int(*i)),
        Expr::Var(v) => RExpr::Slot(lookup(v)?),
        Expr::Unary(op, inner) => RExpr::Unary(*op, Box::new(to_rexpr(inner, lookup)?)),
        Expr::Binary(op, l, r) => RExpr::Binary(*op, Box::new(to_rexpr(l, lookup)?), Box::new(to_rexpr(r, lookup)?)),
    })
}
