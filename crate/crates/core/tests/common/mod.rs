//! Helpers shared by the integration tests: corpus access, a random program
//! generator and a brute-force verification oracle built on `run_trace`.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::Rng;

use scancheck::plc::{lower_to_cfa, run_trace, CycleAutomaton, Value};
use scancheck::st::{parse_source, typecheck_and_resolve, TypedProgram};

pub fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(rel)
}

pub fn read_corpus(rel: &str) -> String {
    std::fs::read_to_string(corpus(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn program(sources: &[(&str, &str)]) -> TypedProgram {
    let units: Vec<_> = sources
        .iter()
        .map(|(path, text)| parse_source(path, text).unwrap_or_else(|e| panic!("{path}: {e}")))
        .collect();
    typecheck_and_resolve(&units).unwrap_or_else(|e| panic!("{e}"))
}

pub fn automaton(text: &str, entry: &str, t_cycle: i64) -> CycleAutomaton {
    lower_to_cfa(&program(&[("test.scl", text)]), entry, t_cycle).unwrap()
}

/// A random single-block program with boolean inputs, at most one timer,
/// and one or two assertions (sometimes an assumption too).
pub struct RandomProgram {
    pub source: String,
    pub inputs: usize,
    pub bound: usize,
}

fn random_expr(rng: &mut StdRng, atoms: &[String], depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0 => "TRUE".into(),
            1 => "FALSE".into(),
            _ => atoms[rng.gen_range(0..atoms.len())].clone(),
        };
    }
    let l = random_expr(rng, atoms, depth - 1);
    match rng.gen_range(0..6) {
        0 => format!("NOT ({l})"),
        1 => format!("({l}) AND ({})", random_expr(rng, atoms, depth - 1)),
        2 => format!("({l}) OR ({})", random_expr(rng, atoms, depth - 1)),
        3 => format!("({l}) XOR ({})", random_expr(rng, atoms, depth - 1)),
        4 => format!("({l}) = ({})", random_expr(rng, atoms, depth - 1)),
        _ => format!("({l}) <> ({})", random_expr(rng, atoms, depth - 1)),
    }
}

pub fn random_program(
    rng: &mut StdRng,
    max_inputs: usize,
    max_bound: usize,
    max_sequence_bits: usize,
) -> RandomProgram {
    let n = rng.gen_range(1..=max_inputs);
    let bound = rng.gen_range(1..=max_bound.min(max_sequence_bits / n).max(1));
    let timer = rng.gen_bool(0.5);
    let mut atoms: Vec<String> = (0..n).map(|i| format!("i{i}")).collect();
    atoms.extend(["o0", "o1", "c"].map(String::from));
    if timer {
        atoms.push("t.Q".into());
    }
    let mut s = String::from("FUNCTION_BLOCK prog\n    VAR_INPUT\n");
    for i in 0..n {
        s.push_str(&format!("        i{i} : BOOL;\n"));
    }
    s.push_str("    END_VAR\n    VAR_OUTPUT\n        o0 : BOOL;\n        o1 : BOOL := TRUE;\n    END_VAR\n    VAR\n        c : BOOL;\n");
    if timer {
        s.push_str("        t : TON;\n");
    }
    s.push_str("    END_VAR\nBEGIN\n");
    let mut body: Vec<String> = Vec::new();
    if timer {
        let pt = rng.gen_range(1..=4) * 100;
        body.push(format!(
            "    t(IN := {}, PT := T#{pt}ms);\n",
            random_expr(rng, &atoms, 2)
        ));
    }
    for _ in 0..rng.gen_range(2..=4) {
        let target = ["o0", "o1", "c"][rng.gen_range(0..3)];
        if rng.gen_bool(0.5) {
            body.push(format!("    {target} := {};\n", random_expr(rng, &atoms, 3)));
        } else {
            let other = ["o0", "o1", "c"][rng.gen_range(0..3)];
            body.push(format!(
                "    IF {} THEN\n        {target} := {};\n    ELSE\n        {other} := {};\n    END_IF;\n",
                random_expr(rng, &atoms, 2),
                random_expr(rng, &atoms, 2),
                random_expr(rng, &atoms, 2)
            ));
        }
    }
    let mut pragmas = Vec::new();
    for k in 0..rng.gen_range(1..=2) {
        // Disjunctions hold more often, so both verdicts stay common.
        let assertion = if rng.gen_bool(0.6) {
            let parts: Vec<String> = (0..3).map(|_| random_expr(rng, &atoms, 2)).collect();
            format!("({}) OR ({}) OR ({})", parts[0], parts[1], parts[2])
        } else {
            random_expr(rng, &atoms, 3)
        };
        pragmas.push(format!("    //#ASSERT({assertion}) : a{k};\n"));
    }
    if rng.gen_bool(0.3) {
        pragmas.push(format!("    //#ASSUME({}) : s0;\n", random_expr(rng, &atoms, 2)));
    }
    for p in pragmas {
        let at = rng.gen_range(0..=body.len());
        body.insert(at, p);
    }
    for stmt in body {
        s.push_str(&stmt);
    }
    s.push_str("END_FUNCTION_BLOCK\n");
    RandomProgram {
        source: s,
        inputs: n,
        bound,
    }
}

/// Per assertion: `None` when no input sequence of length `bound` violates it,
/// else the violation cycle and the lexicographically smallest input prefix
/// among the sequences violating it earliest.
pub fn brute_force(a: &CycleAutomaton, bound: usize) -> Vec<Option<(usize, Vec<Vec<Value>>)>> {
    let n = a.cycle_vars.len();
    let bits = n * bound;
    assert!(bits <= 20, "oracle limited to 2^20 sequences");
    let mut best: Vec<Option<(usize, Vec<Vec<Value>>)>> = vec![None; a.assertions.len()];
    for seq in 0u64..1 << bits {
        // Cycle 1 and, within a cycle, the first input are the most significant.
        let rows: Vec<Vec<Value>> = (0..bound)
            .map(|c| {
                (0..n)
                    .map(|i| {
                        let bit = bits - 1 - (c * n + i);
                        Value::Bool(seq >> bit & 1 == 1)
                    })
                    .collect()
            })
            .collect();
        let trace = run_trace(a, &rows);
        for (id, slot) in best.iter_mut().enumerate() {
            if let Some(cycle) = trace.first_violation(id) {
                if slot.as_ref().is_none_or(|(c, _)| cycle < *c) {
                    *slot = Some((cycle, rows[..cycle].to_vec()));
                }
            }
        }
    }
    best
}

/// Direct evaluation of a boolean expression over named boolean variables.
pub fn eval_bool(e: &scancheck::st::Expr, env: &dyn Fn(&str) -> bool) -> bool {
    use scancheck::st::{BinOp, Expr, UnOp};
    match e {
        Expr::Bool(b) => *b,
        Expr::Var(v) => env(&v.to_string()),
        Expr::Unary(UnOp::Not, inner) => !eval_bool(inner, env),
        Expr::Binary(op, l, r) => {
            let (l, r) = (eval_bool(l, env), eval_bool(r, env));
            match op {
                BinOp::And => l && r,
                BinOp::Or => l || r,
                BinOp::Xor | BinOp::Ne => l != r,
                BinOp::Eq => l == r,
                BinOp::Implies => !l || r,
                other => panic!("not a boolean operator: {other:?}"),
            }
        }
        other => panic!("not a boolean expression: {other:?}"),
    }
}

/// Random valid CEM as CSV text: every column uses groups `1..=k` without gaps.
pub fn random_cem(rng: &mut StdRng, inputs: usize, outputs: usize) -> String {
    let mut cols: Vec<Vec<String>> = Vec::new();
    for _ in 0..outputs {
        let groups = rng.gen_range(1..=3u32);
        let mut cells: Vec<(u32, bool)> = Vec::new();
        let mut col = Vec::new();
        for _ in 0..inputs {
            if rng.gen_bool(0.3) {
                col.push(None);
            } else {
                let cell = (rng.gen_range(1..=groups), rng.gen_bool(0.4));
                cells.push(cell);
                col.push(Some(cell));
            }
        }
        if cells.is_empty() {
            col[0] = Some((1, false));
        }
        // Renumber the groups in use to 1..=k.
        let mut used: Vec<u32> = col.iter().flatten().map(|c| c.0).collect();
        used.sort_unstable();
        used.dedup();
        cols.push(
            col.into_iter()
                .map(|c| match c {
                    None => String::new(),
                    Some((g, neg)) => {
                        let g = used.iter().position(|&u| u == g).unwrap() + 1;
                        format!("{}{g}", if neg { "NA" } else { "A" })
                    }
                })
                .collect(),
        );
    }
    let mut s = String::new();
    let header: Vec<String> = (1..=outputs).map(|o| format!("Out_{o}")).collect();
    s.push_str(&format!(",{}\n", header.join(",")));
    for i in 0..inputs {
        let row: Vec<&str> = cols.iter().map(|c| c[i].as_str()).collect();
        s.push_str(&format!("In_{},{}\n", i + 1, row.join(",")));
    }
    s
}

/// Reads a CEM cell by cell: an output holds when, for some group, every
/// `A` cell of that group has its input on and every `NA` cell its input off.
pub fn cem_cell_oracle(csv_text: &str, valuation: &[bool]) -> Vec<bool> {
    let lines: Vec<Vec<&str>> = csv_text.lines().map(|l| l.split(',').collect()).collect();
    let outputs = lines[0].len() - 1;
    (0..outputs)
        .map(|o| {
            let mut groups: std::collections::BTreeMap<u32, bool> = Default::default();
            for (i, row) in lines[1..].iter().enumerate() {
                let cell = row[o + 1].trim();
                if cell.is_empty() {
                    continue;
                }
                let (neg, g) = match cell.strip_prefix("NA") {
                    Some(g) => (true, g),
                    None => (false, &cell[1..]),
                };
                let ok = valuation[i] != neg;
                let entry = groups.entry(g.parse().unwrap()).or_insert(true);
                *entry &= ok;
            }
            groups.values().any(|&v| v)
        })
        .collect()
}
