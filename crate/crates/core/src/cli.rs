//! Command-line front end. Exit codes: 0 success or all assertions
//! satisfied, 1 some assertion violated, 2 any error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bmc::{verify, CaseFile, Outcome, Unwind, DEFAULT_BUDGET};
use crate::harness::{generate_harness, load_timing_diagram};
use crate::pipeline::{
    check_units, file_stem, load_case, load_program, load_sources, prepare_case, read_file, read_input_rows, LoadError,
    LoadedCase,
};
use crate::plc::{run_named, InputOrder};
use crate::report::{write_report, ReportSettings};
use crate::requirements::{
    build_wrapper, check_sm_completeness, check_sm_determinism, parse_cem, parse_io_matrix, parse_logic, parse_mapping,
    parse_state_machine, Mapping, RequirementError, RequirementSpec, StateMachineSpec,
};
use crate::st::printer::print_expr;
use crate::st::{parse_source, Diagnostic, Span};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "scancheck",
    version,
    about = "Bounded verification of PLC Structured Text programs"
)]
pub struct Cli {
    #[command(flatten)]
    pub options: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Options {
    /// Directory for reports, traces and generated sources.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Maximum number of generated states before giving up.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Verify state machines that failed the determinism or completeness check.
    #[arg(long, global = true)]
    pub allow_incomplete: bool,
    /// Order in which inputs are enumerated; decides which counterexample is reported.
    #[arg(long, global = true, value_enum, default_value_t = SeedOrder::Decl)]
    pub seed_order: SeedOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeedOrder {
    Decl,
    Name,
}

impl From<SeedOrder> for InputOrder {
    fn from(o: SeedOrder) -> InputOrder {
        match o {
            SeedOrder::Decl => InputOrder::Declaration,
            SeedOrder::Name => InputOrder::Name,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and type-check source files.
    Parse {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Run a case's program on concrete inputs and write the trace as CSV.
    Simulate {
        case: PathBuf,
        /// Timing diagram or one-row-per-cycle input table.
        inputs: PathBuf,
    },
    /// Generate a test harness from a timing diagram.
    Harness {
        diagram: PathBuf,
        /// Function block under test.
        #[arg(long)]
        target: String,
        /// Sources declaring the target block.
        #[arg(long = "source", required = true)]
        sources: Vec<PathBuf>,
    },
    /// Verify one or more cases and write a report for each.
    Verify {
        #[arg(required = true)]
        cases: Vec<PathBuf>,
    },
    /// Check a program against a requirement (.cem.csv, .iom.csv, .sm or .logic).
    CheckReq {
        requirement: PathBuf,
        #[arg(long = "source", required = true)]
        sources: Vec<PathBuf>,
        /// Function block under test.
        #[arg(long)]
        entry: String,
        /// Lines `name = expression` relating requirement names to the program.
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        t_cycle_ms: i64,
        #[arg(long, default_value_t = 4)]
        unwind: usize,
    },
}

fn report_error(d: &Diagnostic) -> i32 {
    eprintln!("{d}");
    EXIT_ERROR
}

fn io_error(path: &Path, e: io::Error) -> i32 {
    report_error(&Diagnostic::new(
        path.display().to_string(),
        Span::default(),
        "io-error",
        e.to_string(),
    ))
}

pub fn run(cli: Cli) -> i32 {
    let o = &cli.options;
    match cli.command {
        Command::Parse { paths } => cmd_parse(&paths),
        Command::Simulate { case, inputs } => cmd_simulate(o, &case, &inputs),
        Command::Harness {
            diagram,
            target,
            sources,
        } => cmd_harness(o, &diagram, &target, &sources),
        Command::Verify { cases } => cases.iter().map(|c| cmd_verify(o, c)).max().unwrap_or(EXIT_OK),
        Command::CheckReq {
            requirement,
            sources,
            entry,
            mapping,
            t_cycle_ms,
            unwind,
        } => cmd_check_req(
            o,
            &requirement,
            &sources,
            &entry,
            mapping.as_deref(),
            t_cycle_ms,
            unwind,
        ),
    }
}

pub fn cmd_parse(paths: &[PathBuf]) -> i32 {
    let mut units = Vec::new();
    let mut failed = false;
    for p in paths {
        match load_sources(std::slice::from_ref(p)) {
            Ok(mut u) => units.append(&mut u),
            Err(e) => {
                report_error(&e.diagnostic());
                failed = true;
            }
        }
    }
    if failed {
        return EXIT_ERROR;
    }
    match check_units(&units) {
        Ok(program) => {
            println!(
                "ok: {} file(s), {} block(s), entry candidates: {}",
                units.len(),
                program.blocks.len(),
                program.entry_candidates().join(", ")
            );
            EXIT_OK
        }
        Err(e) => report_error(&e.diagnostic()),
    }
}

fn cmd_simulate(o: &Options, case: &Path, inputs: &Path) -> i32 {
    let loaded = match load_case(case, o.seed_order.into()) {
        Ok(l) => l,
        Err(e) => return report_error(&e.diagnostic()),
    };
    let rows = match read_input_rows(inputs, &loaded.automaton) {
        Ok(r) => r,
        Err(e) => return report_error(&e.diagnostic()),
    };
    let trace = match run_named(&loaded.automaton, &rows) {
        Ok(t) => t,
        Err(e) => {
            return report_error(&Diagnostic::new(
                inputs.display().to_string(),
                Span::default(),
                "input-error",
                e.to_string(),
            ))
        }
    };
    let mut buf = Vec::new();
    trace.write_csv(&loaded.automaton, &mut buf).expect("writing to memory");
    if o.out == Path::new(".") {
        io::stdout().write_all(&buf).expect("stdout");
    } else {
        let path = o.out.join(format!("{}_trace.csv", file_stem(inputs)));
        if let Err(e) = fs::create_dir_all(&o.out).and_then(|_| fs::write(&path, &buf)) {
            return io_error(&path, e);
        }
        println!("{}", path.display());
    }
    for (cycle, ev) in trace.events.iter().enumerate() {
        for e in ev {
            eprintln!("cycle {}: {e:?}", cycle + 1);
        }
    }
    EXIT_OK
}

fn cmd_harness(o: &Options, diagram: &Path, target: &str, sources: &[PathBuf]) -> i32 {
    let program = match load_program(sources) {
        Ok(p) => p,
        Err(e) => return report_error(&e.diagnostic()),
    };
    let text = match read_file(diagram) {
        Ok(t) => t,
        Err(e) => return report_error(&e.diagnostic()),
    };
    let shown = diagram.display().to_string();
    let d = match load_timing_diagram(&text) {
        Ok(d) => d,
        Err(e) => return report_error(&Diagnostic::new(shown, Span::default(), "diagram-error", e.to_string())),
    };
    let Some(fb) = program.block(target) else {
        return report_error(&Diagnostic::new(
            shown,
            Span::default(),
            "unknown-block",
            format!("no function block `{target}` in the given sources"),
        ));
    };
    let h = match generate_harness(&d, fb) {
        Ok(h) => h,
        Err(e) => return report_error(&Diagnostic::new(shown, Span::default(), "harness-error", e.to_string())),
    };
    let path = o.out.join(format!("{}_harness.scl", file_stem(diagram)));
    if let Err(e) = fs::create_dir_all(&o.out).and_then(|_| fs::write(&path, &h.text)) {
        return io_error(&path, e);
    }
    println!("{}", path.display());
    EXIT_OK
}

/// Explores a loaded case and writes its report; returns the exit code.
fn verify_and_report(o: &Options, mut loaded: LoadedCase, case_id: String, notes: Vec<String>) -> i32 {
    let start = Instant::now();
    let outcome: Outcome = match verify(&loaded.case, o.budget) {
        Ok(r) => r,
        Err(e) => {
            return report_error(&Diagnostic::new(
                loaded.path.display().to_string(),
                Span::default(),
                "verify-error",
                e.to_string(),
            ))
        }
    };
    loaded.timing.verify_ms = start.elapsed().as_secs_f64() * 1000.0;
    let settings = ReportSettings {
        case_id,
        entry: loaded.case.entry.clone(),
        t_cycle_ms: loaded.case.t_cycle,
        unwinding: loaded.unwinding.describe(loaded.case.t_cycle),
        budget: o.budget,
        assumptions: loaded.case.assumptions.iter().map(print_expr).collect(),
        notes,
        timing: loaded.timing,
    };
    let (report, path) = match write_report(&o.out, settings, &loaded.automaton, &outcome) {
        Ok(r) => r,
        Err(e) => return io_error(&o.out, e),
    };
    println!("{}: {}", path.display(), report.summary());
    for v in outcome.verdicts.iter().filter(|v| v.violated()) {
        if let Some(c) = &v.counterexample {
            let names = loaded.automaton.input_names();
            let last = c.inputs.last().map(|row| {
                names
                    .iter()
                    .zip(row)
                    .map(|(n, v)| format!("{n}={v}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            });
            println!(
                "  {} violated at cycle {}; sampled inputs: {}",
                v.assertion,
                c.inputs.len(),
                last.unwrap_or_default()
            );
        }
    }
    if report.violated() > 0 {
        EXIT_VIOLATED
    } else {
        EXIT_OK
    }
}

fn cmd_verify(o: &Options, case: &Path) -> i32 {
    match load_case(case, o.seed_order.into()) {
        Ok(loaded) => {
            let id = loaded.stem();
            verify_and_report(o, loaded, id, Vec::new())
        }
        Err(e) => report_error(&located(e, case)),
    }
}

/// Fills in the case path for errors that do not carry one.
fn located(e: LoadError, case: &Path) -> Diagnostic {
    let mut d = e.diagnostic();
    if d.path == "<case>" {
        d.path = case.display().to_string();
    }
    d
}

/// Reads a requirement, choosing the formalism by file name.
pub fn load_requirement(path: &Path) -> Result<RequirementSpec, Diagnostic> {
    let text = read_file(path).map_err(|e| e.diagnostic())?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    let shown = path.display().to_string();
    let spec = if name.ends_with(".cem.csv") {
        parse_cem(&text).map(RequirementSpec::Cem)
    } else if name.ends_with(".iom.csv") {
        parse_io_matrix(&text).map(RequirementSpec::IoMatrix)
    } else if name.ends_with(".sm") {
        parse_state_machine(&text).map(RequirementSpec::StateMachine)
    } else if name.ends_with(".logic") {
        parse_logic(&text).map(RequirementSpec::Logic)
    } else {
        return Err(Diagnostic::new(
            shown,
            Span::default(),
            "unknown-requirement",
            "expected a .cem.csv, .iom.csv, .sm or .logic file",
        ));
    };
    spec.map_err(|e| requirement_diagnostic(&shown, &e))
}

fn requirement_diagnostic(path: &str, e: &RequirementError) -> Diagnostic {
    let line = match e {
        RequirementError::Syntax { line, .. } => *line as u32,
        _ => 0,
    };
    Diagnostic::new(
        path,
        Span::new(line, if line > 0 { 1 } else { 0 }),
        "requirement-error",
        e.to_string(),
    )
}

fn valuation(w: &[(String, bool)]) -> String {
    w.iter()
        .map(|(n, v)| format!("{n}={}", if *v { "TRUE" } else { "FALSE" }))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Determinism and completeness findings, one line each, with witnesses.
pub fn state_machine_findings(s: &StateMachineSpec) -> Result<Vec<String>, RequirementError> {
    let describe = |i: usize| {
        let t = &s.transitions[i];
        format!("#{} `{} -> {} when {}`", i + 1, t.src, t.dst, print_expr(&t.guard))
    };
    let total = 1u64 << s.inputs().len();
    let mut out = Vec::new();
    for c in check_sm_determinism(s)? {
        out.push(format!(
            "nondeterministic in state {}: {} and {} are both enabled for {}",
            c.state,
            describe(c.first),
            describe(c.second),
            valuation(&c.witness)
        ));
    }
    for g in check_sm_completeness(s)? {
        out.push(format!(
            "incomplete in state {}: no transition is enabled for {} of {total} input valuations, e.g. {}",
            g.state,
            g.count,
            valuation(&g.witness)
        ));
    }
    Ok(out)
}

fn cmd_check_req(
    o: &Options,
    requirement: &Path,
    sources: &[PathBuf],
    entry: &str,
    mapping: Option<&Path>,
    t_cycle_ms: i64,
    unwind: usize,
) -> i32 {
    let shown = requirement.display().to_string();
    let spec = match load_requirement(requirement) {
        Ok(s) => s,
        Err(d) => return report_error(&d),
    };
    let mut notes = Vec::new();
    if let RequirementSpec::StateMachine(s) = &spec {
        match state_machine_findings(s) {
            Ok(f) => notes = f,
            Err(e) => return report_error(&requirement_diagnostic(&shown, &e)),
        }
        for n in &notes {
            eprintln!("{shown}: {n}");
        }
        if !notes.is_empty() && !o.allow_incomplete {
            eprintln!("{shown}: refusing to verify an ill-formed state machine; pass --allow-incomplete to override");
            return EXIT_ERROR;
        }
    }
    let mapping = match mapping {
        None => Mapping::default(),
        Some(p) => {
            let text = match read_file(p) {
                Ok(t) => t,
                Err(e) => return report_error(&e.diagnostic()),
            };
            match parse_mapping(&text) {
                Ok(m) => m,
                Err(e) => return report_error(&requirement_diagnostic(&p.display().to_string(), &e)),
            }
        }
    };
    let wrapper = match build_wrapper(&spec, entry, &mapping, false) {
        Ok(w) => w,
        Err(e) => return report_error(&requirement_diagnostic(&shown, &e)),
    };
    let stem = file_stem(requirement);
    let wrapper_path = o.out.join(format!("{stem}_wrapper.scl"));
    if let Err(e) = fs::create_dir_all(&o.out).and_then(|_| fs::write(&wrapper_path, &wrapper.source)) {
        return io_error(&wrapper_path, e);
    }
    let start = Instant::now();
    let mut units = match load_sources(sources) {
        Ok(u) => u,
        Err(e) => return report_error(&e.diagnostic()),
    };
    match parse_source(&wrapper_path.display().to_string(), &wrapper.source) {
        Ok(u) => units.push(u),
        Err(e) => {
            return report_error(&Diagnostic::new(
                wrapper_path.display().to_string(),
                e.span(),
                e.code(),
                e.to_string(),
            ))
        }
    }
    let program = match check_units(&units) {
        Ok(p) => p,
        Err(e) => return report_error(&e.diagnostic()),
    };
    let parse_ms = start.elapsed().as_secs_f64() * 1000.0;
    let file = CaseFile {
        sources: sources.to_vec(),
        entry: wrapper.entry.clone(),
        t_cycle_ms,
        unwind: Unwind::Fixed(unwind),
        assumptions: Vec::new(),
        diagram: None,
    };
    match prepare_case(requirement, file, program, o.seed_order.into(), parse_ms) {
        Ok(loaded) => verify_and_report(o, loaded, stem, notes),
        Err(e) => report_error(&located(e, requirement)),
    }
}
