mod common;

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use common::{automaton, eval_bool, program, read_corpus};
use scancheck::bmc::{verify, Outcome, Status, VerificationCase, DEFAULT_BUDGET};
use scancheck::plc::{run_named, run_trace, InputOrder, Value};
use scancheck::requirements::{
    build_wrapper, check_sm_completeness, check_sm_determinism, compile_io_matrix, compile_logic_diagram,
    compile_state_machine, parse_cem, parse_io_matrix, parse_logic, parse_mapping, parse_state_machine, Mapping,
    RequirementError, RequirementSpec,
};

/// Gate tree kept independent of the library's representation.
#[derive(Debug, Clone)]
enum Tree {
    Leaf(usize),
    Not(Box<Tree>),
    And(Vec<Tree>),
    Or(Vec<Tree>),
}

impl Tree {
    fn random(rng: &mut StdRng, depth: usize, inputs: usize) -> Tree {
        if depth == 0 || rng.gen_bool(0.2) {
            return Tree::Leaf(rng.gen_range(0..inputs));
        }
        let kids = |rng: &mut StdRng| {
            (0..rng.gen_range(2..=3))
                .map(|_| Tree::random(rng, depth - 1, inputs))
                .collect()
        };
        match rng.gen_range(0..5) {
            0 => Tree::Not(Box::new(Tree::random(rng, depth - 1, inputs))),
            1 | 2 => Tree::And(kids(rng)),
            _ => Tree::Or(kids(rng)),
        }
    }

    fn text(&self) -> String {
        let list = |ts: &[Tree]| ts.iter().map(Tree::text).collect::<Vec<_>>().join(", ");
        match self {
            Tree::Leaf(i) => format!("x{i}"),
            Tree::Not(t) => format!("NOT({})", t.text()),
            Tree::And(ts) => format!("AND({})", list(ts)),
            Tree::Or(ts) => format!("OR({})", list(ts)),
        }
    }

    fn eval(&self, v: &[bool]) -> bool {
        match self {
            Tree::Leaf(i) => v[*i],
            Tree::Not(t) => !t.eval(v),
            Tree::And(ts) => ts.iter().all(|t| t.eval(v)),
            Tree::Or(ts) => ts.iter().any(|t| t.eval(v)),
        }
    }
}

#[test]
fn logic_diagrams_compute_their_gates() {
    let mut rng = StdRng::seed_from_u64(41);
    for _ in 0..200 {
        let inputs = rng.gen_range(1..=5);
        let tree = Tree::random(&mut rng, 4, inputs);
        let text = format!("Out = {}", tree.text());
        let (out, formula) = compile_logic_diagram(&parse_logic(&text).unwrap()[0]);
        assert_eq!(out, "Out");
        for bits in 0..1u32 << inputs {
            let v: Vec<bool> = (0..inputs).map(|i| bits >> i & 1 == 1).collect();
            let env = |n: &str| v[n[1..].parse::<usize>().unwrap()];
            assert_eq!(eval_bool(&formula, &env), tree.eval(&v), "{text} at {v:?}");
        }
    }
}

#[test]
fn logic_syntax_errors() {
    for bad in [
        "Out AND(a, b)",
        "Out = AND(a)",
        "Out = NOT(a, b)",
        "Out = XOR(a, b)",
        "Out = AND(a, b",
        "1x = a",
    ] {
        assert!(parse_logic(bad).is_err(), "{bad}");
    }
}

/// Random guard as a conjunction of literals over `inputs` names, or TRUE.
fn random_guard(rng: &mut StdRng, inputs: &[&str]) -> (String, Vec<(usize, bool)>) {
    let mut lits: Vec<(usize, bool)> = Vec::new();
    for i in 0..inputs.len() {
        if rng.gen_bool(0.5) {
            lits.push((i, rng.gen()));
        }
    }
    if lits.is_empty() {
        return ("TRUE".into(), lits);
    }
    let text = lits
        .iter()
        .map(|&(i, pos)| {
            if pos {
                inputs[i].to_string()
            } else {
                format!("NOT {}", inputs[i])
            }
        })
        .collect::<Vec<_>>()
        .join(" AND ");
    (text, lits)
}

/// Source state, target state, guard literals.
type RandomTransition = (usize, usize, Vec<(usize, bool)>);

struct RandomMachine {
    text: String,
    states: usize,
    transitions: Vec<RandomTransition>,
}

const SM_INPUTS: [&str; 3] = ["a", "b", "c"];

fn random_machine(rng: &mut StdRng) -> RandomMachine {
    let states = rng.gen_range(1..=3);
    let mut text = String::new();
    for s in 0..states {
        text.push_str(&format!("state S{s}\n"));
    }
    text.push_str("init S0\n");
    let mut transitions = Vec::new();
    for _ in 0..rng.gen_range(1..=6) {
        let (src, dst) = (rng.gen_range(0..states), rng.gen_range(0..states));
        let (guard, lits) = random_guard(rng, &SM_INPUTS);
        text.push_str(&format!("trans S{src} -> S{dst} when {guard}\n"));
        transitions.push((src, dst, lits));
    }
    RandomMachine {
        text,
        states,
        transitions,
    }
}

fn enabled(lits: &[(usize, bool)], v: &[bool]) -> bool {
    lits.iter().all(|&(i, pos)| v[i] == pos)
}

/// All valuations over the inputs that appear in some guard.
fn valuations(used: &[usize]) -> Vec<Vec<bool>> {
    (0..1u32 << used.len())
        .map(|bits| {
            let mut v = vec![false; SM_INPUTS.len()];
            for (k, &i) in used.iter().enumerate() {
                v[i] = bits >> k & 1 == 1;
            }
            v
        })
        .collect()
}

fn used_inputs(m: &RandomMachine) -> Vec<usize> {
    let mut used: Vec<usize> = m.transitions.iter().flat_map(|t| t.2.iter().map(|l| l.0)).collect();
    used.sort();
    used.dedup();
    used
}

#[test]
fn state_machine_checks_match_enumeration() {
    let mut rng = StdRng::seed_from_u64(43);
    for _ in 0..300 {
        let m = random_machine(&mut rng);
        let spec = parse_state_machine(&m.text).unwrap();
        let all = valuations(&used_inputs(&m));

        let mut expected_conflicts = Vec::new();
        for x in 0..m.transitions.len() {
            for y in x + 1..m.transitions.len() {
                let (tx, ty) = (&m.transitions[x], &m.transitions[y]);
                if tx.0 == ty.0 && all.iter().any(|v| enabled(&tx.2, v) && enabled(&ty.2, v)) {
                    expected_conflicts.push((format!("S{}", tx.0), x, y));
                }
            }
        }
        let conflicts = check_sm_determinism(&spec).unwrap();
        let mut got: Vec<(String, usize, usize)> =
            conflicts.iter().map(|c| (c.state.clone(), c.first, c.second)).collect();
        got.sort();
        expected_conflicts.sort();
        assert_eq!(got, expected_conflicts, "{}", m.text);
        for c in &conflicts {
            let v = witness_values(&c.witness);
            assert!(enabled(&m.transitions[c.first].2, &v) && enabled(&m.transitions[c.second].2, &v));
        }

        let gaps = check_sm_completeness(&spec).unwrap();
        for s in 0..m.states {
            let missing = all
                .iter()
                .filter(|v| !m.transitions.iter().any(|t| t.0 == s && enabled(&t.2, v)))
                .count() as u64;
            let gap = gaps.iter().find(|g| g.state == format!("S{s}"));
            assert_eq!(gap.map_or(0, |g| g.count), missing, "S{s}\n{}", m.text);
            if let Some(g) = gap {
                let v = witness_values(&g.witness);
                assert!(!m.transitions.iter().any(|t| t.0 == s && enabled(&t.2, &v)));
            }
        }
    }
}

fn witness_values(w: &[(String, bool)]) -> Vec<bool> {
    let mut v = vec![false; SM_INPUTS.len()];
    for (name, b) in w {
        v[SM_INPUTS.iter().position(|i| i == name).unwrap()] = *b;
    }
    v
}

/// The compiled monitor tracks the reference run: first listed enabled
/// transition wins, no enabled transition keeps the state.
#[test]
fn state_machine_monitor_follows_reference_run() {
    let mut rng = StdRng::seed_from_u64(44);
    for _ in 0..100 {
        let m = random_machine(&mut rng);
        let spec = parse_state_machine(&m.text).unwrap();
        let mon = compile_state_machine(&spec, "mon_fb", false).unwrap();
        let a = automaton(&mon.source, "mon_fb", 100);
        let names = spec.inputs();
        let used = used_inputs(&m);
        let steps: Vec<Vec<bool>> = (0..8)
            .map(|_| {
                let mut v = vec![false; SM_INPUTS.len()];
                for &i in &used {
                    v[i] = rng.gen();
                }
                v
            })
            .collect();
        let rows: Vec<HashMap<String, Value>> = steps
            .iter()
            .map(|v| {
                names
                    .iter()
                    .map(|n| {
                        (
                            n.clone(),
                            Value::Bool(v[SM_INPUTS.iter().position(|i| i == n).unwrap()]),
                        )
                    })
                    .collect()
            })
            .collect();
        let trace = run_named(&a, &rows).unwrap();
        let slot = a.slot_by_name("state").unwrap();
        let mut state = 0;
        for (k, v) in steps.iter().enumerate() {
            if let Some(t) = m.transitions.iter().find(|t| t.0 == state && enabled(&t.2, v)) {
                state = t.1;
            }
            assert_eq!(
                trace.states[k].values[slot],
                Value::Int(state as i64),
                "step {k}\n{}",
                m.text
            );
        }
    }
}

#[test]
fn one_state_machine_with_true_guard_is_constant() {
    let spec = parse_state_machine("state Only\ninit Only\ntrans Only -> Only when TRUE\n").unwrap();
    assert!(spec.inputs().is_empty());
    assert!(check_sm_determinism(&spec).unwrap().is_empty());
    assert!(check_sm_completeness(&spec).unwrap().is_empty());
    let mon = compile_state_machine(&spec, "mon_fb", true).unwrap();
    let a = automaton(&mon.source, "mon_fb", 100);
    let trace = run_trace(&a, &[vec![], vec![], vec![]]);
    let slot = a.slot_by_name("state").unwrap();
    assert!(trace.states.iter().all(|s| s.values[slot] == Value::Int(0)));
}

#[test]
fn state_machine_errors() {
    let cases = [
        "state A\ntrans A -> A when TRUE\n",
        "state A\ninit B\n",
        "state A\nstate A\ninit A\n",
        "state A\ninit A\ntrans A -> B when TRUE\n",
        "state A\ninit A\ntrans A -> A when 3\n",
        "state A\ninit A\ntrans A -> A\n",
        "state A\ninit A\nflip A\n",
    ];
    for text in cases {
        assert!(
            matches!(parse_state_machine(text), Err(RequirementError::Syntax { .. })),
            "{text}"
        );
    }
    let guard = (0..17).map(|i| format!("x{i}")).collect::<Vec<_>>().join(" AND ");
    let wide = parse_state_machine(&format!("state A\ninit A\ntrans A -> A when {guard}\n")).unwrap();
    assert!(matches!(
        check_sm_determinism(&wide),
        Err(RequirementError::TooManyInputs { count: 17, limit: 16 })
    ));
    let broken = parse_state_machine(&read_corpus("requirements/operation_modes.sm")).unwrap();
    assert!(matches!(
        compile_state_machine(&broken, "mon_fb", true),
        Err(RequirementError::NondeterministicSpec(_))
    ));
}

fn monitor_outputs(source: &str, inputs: &[String], outputs: &[String], rows: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let a = automaton(source, "mon_fb", 100);
    let named: Vec<HashMap<String, Value>> = rows
        .iter()
        .map(|r| inputs.iter().cloned().zip(r.iter().map(|&b| Value::Bool(b))).collect())
        .collect();
    let trace = run_named(&a, &named).unwrap();
    trace
        .states
        .iter()
        .map(|s| {
            outputs
                .iter()
                .map(|o| s.values[a.slot_by_name(o).unwrap()].as_bool())
                .collect()
        })
        .collect()
}

fn random_matrix(rng: &mut StdRng, inputs: usize, outputs: usize, corner: &str) -> String {
    let mut text = corner.to_string();
    for o in 0..outputs {
        text.push_str(&format!(",o{o}"));
    }
    text.push('\n');
    for i in 0..inputs {
        let mut cells: Vec<&str> = (0..outputs)
            .map(|_| *["", "Set", "Reset"].choose(rng).unwrap())
            .collect();
        if cells.iter().all(|c| c.is_empty()) {
            cells[0] = "Set";
        }
        text.push_str(&format!("i{i},{}\n", cells.join(",")));
    }
    text
}

#[test]
fn io_matrix_last_row_wins() {
    let mut rng = StdRng::seed_from_u64(45);
    for _ in 0..50 {
        let text = random_matrix(&mut rng, 3, 2, "");
        let m = parse_io_matrix(&text).unwrap();
        let mon = compile_io_matrix(&m, "mon_fb").unwrap();
        let rows: Vec<Vec<bool>> = (0..10).map(|_| (0..3).map(|_| rng.gen()).collect()).collect();
        let got = monitor_outputs(&mon.source, &m.inputs, &m.outputs, &rows);
        let mut held = vec![false; 2];
        for (k, r) in rows.iter().enumerate() {
            for (i, active) in r.iter().enumerate() {
                if !active {
                    continue;
                }
                let line = text.lines().nth(i + 1).unwrap();
                for (o, cell) in line.split(',').skip(1).enumerate() {
                    match cell {
                        "Set" => held[o] = true,
                        "Reset" => held[o] = false,
                        _ => {}
                    }
                }
            }
            assert_eq!(got[k], held, "{text} step {k}");
        }
    }
}

/// Under exclusive inputs the row order cannot matter.
#[test]
fn exclusive_io_matrix_ignores_row_order() {
    let mut rng = StdRng::seed_from_u64(46);
    for _ in 0..30 {
        let text = random_matrix(&mut rng, 4, 2, "priority=exclusive");
        let mut lines: Vec<&str> = text.lines().collect();
        let (header, body) = lines.split_at_mut(1);
        body.shuffle(&mut rng);
        let shuffled = format!("{}\n{}\n", header[0], body.join("\n"));
        let rows: Vec<Vec<bool>> = (0..10)
            .map(|_| {
                let hot = rng.gen_range(0..5);
                (0..4).map(|i| i == hot).collect()
            })
            .collect();
        let run = |t: &str| {
            let m = parse_io_matrix(t).unwrap();
            let mon = compile_io_matrix(&m, "mon_fb").unwrap();
            let ordered: Vec<Vec<bool>> = rows
                .iter()
                .map(|r| m.inputs.iter().map(|n| r[n[1..].parse::<usize>().unwrap()]).collect())
                .collect();
            monitor_outputs(&mon.source, &m.inputs, &m.outputs, &ordered)
        };
        assert_eq!(run(&text), run(&shuffled), "{text}\n{shuffled}");
    }
}

fn check(spec: &RequirementSpec, dut: &str, block: &str, mapping: &Mapping, bound: usize) -> Outcome {
    let w = build_wrapper(spec, block, mapping, true).unwrap();
    let case = VerificationCase {
        program: program(&[("dut.scl", dut), ("wrapper.scl", &w.source)]),
        entry: w.entry.clone(),
        t_cycle: 100,
        bound,
        assumptions: vec![],
        order: InputOrder::Declaration,
    };
    verify(&case, DEFAULT_BUDGET).unwrap()
}

#[test]
fn two_modes_wrapper_verdicts() {
    let spec = RequirementSpec::StateMachine(parse_state_machine(&read_corpus("requirements/two_modes.sm")).unwrap());
    let ok = check(
        &spec,
        &read_corpus("requirements/two_modes.scl"),
        "two_modes",
        &Mapping::default(),
        6,
    );
    let names: Vec<&str> = ok.verdicts.iter().map(|v| v.assertion.as_str()).collect();
    assert_eq!(names, ["req_state_Mode_1", "req_state_Mode_2"]);
    assert!(ok.all_satisfied());

    let stuck = check(
        &spec,
        &read_corpus("requirements/two_modes_stuck.scl"),
        "two_modes",
        &Mapping::default(),
        6,
    );
    let v = &stuck.verdicts[0];
    assert_eq!(v.status, Status::Violated { cycle: 2 });
    let cex = v.counterexample.as_ref().unwrap();
    let w = build_wrapper(&spec, "two_modes", &Mapping::default(), true).unwrap();
    let a = automaton_of(&read_corpus("requirements/two_modes_stuck.scl"), &w.source, &w.entry);
    let value = |k: usize, n: &str| cex.trace.states[k].values[a.slot_by_name(n).unwrap()];
    // First enter Mode_2, then request Mode_1, which the stuck block ignores.
    assert_eq!(value(0, "dut_inst.Request_Mode_2"), Value::Bool(true));
    assert_eq!(value(1, "dut_inst.Request_Mode_1"), Value::Bool(true));
    assert_eq!(value(1, "dut_inst.Mode_2"), Value::Bool(true));
}

fn automaton_of(dut: &str, wrapper: &str, entry: &str) -> scancheck::plc::CycleAutomaton {
    scancheck::plc::lower_to_cfa(&program(&[("dut.scl", dut), ("wrapper.scl", wrapper)]), entry, 100).unwrap()
}

#[test]
fn combinational_wrappers_accept_correct_blocks() {
    let cem = RequirementSpec::Cem(parse_cem(&read_corpus("requirements/two_outputs.cem.csv")).unwrap());
    assert!(check(
        &cem,
        &read_corpus("requirements/two_outputs.scl"),
        "two_outputs",
        &Mapping::default(),
        2
    )
    .all_satisfied());
    let logic = RequirementSpec::Logic(parse_logic(&read_corpus("requirements/and_or.logic")).unwrap());
    assert!(check(
        &logic,
        &read_corpus("requirements/and_or.scl"),
        "and_or",
        &Mapping::default(),
        2
    )
    .all_satisfied());
    let iom = RequirementSpec::IoMatrix(parse_io_matrix(&read_corpus("requirements/set_reset.iom.csv")).unwrap());
    assert!(check(
        &iom,
        &read_corpus("requirements/set_reset.scl"),
        "set_reset",
        &Mapping::default(),
        4
    )
    .all_satisfied());
}

#[test]
fn wrong_implementation_is_caught() {
    let wrong = read_corpus("requirements/and_or.scl").replace("In_3 AND (In_2 OR In_1)", "In_3 OR (In_2 AND In_1)");
    let logic = RequirementSpec::Logic(parse_logic(&read_corpus("requirements/and_or.logic")).unwrap());
    let outcome = check(&logic, &wrong, "and_or", &Mapping::default(), 2);
    assert_eq!(outcome.verdicts[0].assertion, "req_Out_1");
    assert_eq!(outcome.verdicts[0].status, Status::Violated { cycle: 1 });

    // Set/reset block with the priority reversed.
    let reversed = read_corpus("requirements/set_reset.scl")
        .replace("IF In_3 THEN", "IF In_1_first THEN")
        .replace("ELSIF In_1 THEN", "ELSIF In_3 THEN")
        .replace("IF In_1_first THEN", "IF In_1 THEN");
    let iom = RequirementSpec::IoMatrix(parse_io_matrix(&read_corpus("requirements/set_reset.iom.csv")).unwrap());
    let outcome = check(&iom, &reversed, "set_reset", &Mapping::default(), 4);
    assert!(!outcome.all_satisfied());
}

#[test]
fn mapping_renames_signals() {
    let spec = RequirementSpec::StateMachine(
        parse_state_machine(&read_corpus("requirements/operation_modes_fixed.sm")).unwrap(),
    );
    let mapping = parse_mapping(&read_corpus("requirements/operation_modes.map")).unwrap();
    let outcome = check(
        &spec,
        &read_corpus("requirements/operation_modes.scl"),
        "operation_modes",
        &mapping,
        4,
    );
    assert!(outcome.all_satisfied(), "{:?}", outcome.verdicts);

    assert!(parse_mapping("a = x\na = y\n").is_err());
    assert!(parse_mapping("just a name\n").is_err());
}
