mod common;

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{automaton, corpus};
use scancheck::pipeline::{load_case, read_input_rows};
use scancheck::plc::builtins::{ctud_step, CtudInputs, CtudState};
use scancheck::plc::{run_named, run_trace, CycleAutomaton, InputOrder, Value};
use scancheck::st::IntDomain;

/// Up/down counter written from the textbook description: reset wins, then
/// load, then counting on rising edges of CU and CD (both at once cancel).
#[derive(Default, Clone, Copy)]
struct RefCounter {
    cv: i64,
    cu_last: bool,
    cd_last: bool,
}

impl RefCounter {
    #[allow(clippy::too_many_arguments)]
    fn step(&mut self, cu: bool, cd: bool, r: bool, ld: bool, pv: i64, lo: i64, hi: i64) -> (i64, bool, bool) {
        let up = cu && !self.cu_last;
        let down = cd && !self.cd_last;
        self.cu_last = cu;
        self.cd_last = cd;
        if r {
            self.cv = 0.clamp(lo, hi);
        } else if ld {
            self.cv = pv.clamp(lo, hi);
        } else if up && !down && self.cv < hi {
            self.cv += 1;
        } else if down && !up && self.cv > lo {
            self.cv -= 1;
        }
        (self.cv, self.cv >= pv, self.cv <= 0)
    }
}

#[test]
fn ctud_matches_reference_on_random_sequences() {
    let mut rng = StdRng::seed_from_u64(11);
    let domain = IntDomain {
        lo: -3,
        hi: 5,
        explicit: true,
    };
    for _ in 0..1000 {
        let mut reference = RefCounter::default();
        let mut state = CtudState {
            cv: 0,
            qu: false,
            qd: true,
            cu_prev: false,
            cd_prev: false,
        };
        for _ in 0..rng.gen_range(1..20) {
            let inputs = CtudInputs {
                cu: rng.gen(),
                cd: rng.gen(),
                r: rng.gen_bool(0.1),
                ld: rng.gen_bool(0.1),
                pv: rng.gen_range(-2..7),
            };
            state = ctud_step(state, inputs, domain);
            let (cv, qu, qd) = reference.step(inputs.cu, inputs.cd, inputs.r, inputs.ld, inputs.pv, -3, 5);
            assert_eq!((state.cv, state.qu, state.qd), (cv, qu, qd));
        }
    }
}

fn column(a: &CycleAutomaton, trace: &scancheck::plc::Trace, name: &str) -> Vec<Value> {
    let slot = a.slot_by_name(name).unwrap_or_else(|| panic!("no slot {name}"));
    trace.states.iter().map(|s| s.values[slot]).collect()
}

#[test]
fn ctud_inside_a_program_counts_edges() {
    let text = "FUNCTION_BLOCK f
    VAR_INPUT
        up : BOOL;
        down : BOOL;
    END_VAR
    VAR
        c : CTUD;
    END_VAR
    VAR_OUTPUT
        n : INT;
    END_VAR
BEGIN
    c(CU := up, CD := down, R := FALSE, LD := FALSE, PV := 3);
    n := c.CV;
END_FUNCTION_BLOCK
";
    let a = automaton(text, "f", 100);
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..100 {
        let rows: Vec<Vec<Value>> = (0..12)
            .map(|_| vec![Value::Bool(rng.gen()), Value::Bool(rng.gen())])
            .collect();
        let trace = run_trace(&a, &rows);
        let mut reference = RefCounter::default();
        let expected: Vec<Value> = rows
            .iter()
            .map(|r| {
                Value::Int(
                    reference
                        .step(r[0].as_bool(), r[1].as_bool(), false, false, 3, 0, 255)
                        .0,
                )
            })
            .collect();
        assert_eq!(column(&a, &trace, "n"), expected);
    }
}

#[test]
fn ton_matches_reference_on_random_inputs() {
    let text = "FUNCTION_BLOCK f
    VAR_INPUT
        start : BOOL;
    END_VAR
    VAR
        t : TON;
    END_VAR
    VAR_OUTPUT
        done : BOOL;
    END_VAR
BEGIN
    t(IN := start, PT := T#300ms);
    done := t.Q;
END_FUNCTION_BLOCK
";
    let a = automaton(text, "f", 100);
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..200 {
        let inputs: Vec<bool> = (0..10).map(|_| rng.gen_bool(0.8)).collect();
        let rows: Vec<Vec<Value>> = inputs.iter().map(|&b| vec![Value::Bool(b)]).collect();
        let trace = run_trace(&a, &rows);
        // Elapsed time restarts at 0 on a rising edge and grows by one cycle per scan.
        let mut et = 0;
        let mut prev = false;
        let expected: Vec<Value> = inputs
            .iter()
            .map(|&on| {
                et = match (on, prev) {
                    (false, _) => 0,
                    (true, false) => 0,
                    (true, true) => (et + 100).min(300),
                };
                prev = on;
                Value::Bool(on && et >= 300)
            })
            .collect();
        assert_eq!(column(&a, &trace, "done"), expected, "{inputs:?}");
    }
}

#[test]
fn fdback_error_follows_the_timing_diagram() {
    let loaded = load_case(&corpus("fdback_model.case"), InputOrder::Declaration).unwrap();
    let a = &loaded.automaton;
    let rows = read_input_rows(&corpus("fdback_timing.csv"), a).unwrap();
    let trace = run_named(a, &rows).unwrap();
    let error: Vec<bool> = column(a, &trace, "ERROR").iter().map(|v| v.as_bool()).collect();
    assert_eq!(error, [false, false, false, true, true, false]);
    let table = read_input_rows(&corpus("fdback_inputs.csv"), a).unwrap();
    assert_eq!(run_named(a, &table).unwrap().states, trace.states);
}

#[test]
fn module_1_always_reports_false() {
    let loaded = load_case(&corpus("module_1.case"), InputOrder::Declaration).unwrap();
    let rows = vec![HashMap::new(); 3];
    let trace = run_named(&loaded.automaton, &rows).unwrap();
    assert_eq!(column(&loaded.automaton, &trace, "v_1"), [Value::Bool(false); 3]);
}

#[test]
fn missing_input_is_reported() {
    let loaded = load_case(&corpus("module_2.case"), InputOrder::Declaration).unwrap();
    let err = run_named(&loaded.automaton, &[HashMap::new()]).unwrap_err();
    assert!(err.to_string().contains("v_1"), "{err}");
}

#[test]
fn integer_arithmetic_saturates_at_the_domain() {
    let text = "FUNCTION_BLOCK f
    VAR_OUTPUT
        n : INT := 250;
        q : INT;
    END_VAR
BEGIN
    n := n + 3;
    q := n / 0;
END_FUNCTION_BLOCK
";
    let a = automaton(text, "f", 100);
    let trace = run_trace(&a, &[vec![], vec![], vec![]]);
    assert_eq!(
        column(&a, &trace, "n"),
        [Value::Int(253), Value::Int(255), Value::Int(255)]
    );
    assert_eq!(column(&a, &trace, "q"), [Value::Int(0); 3]);
}
