mod input;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use absprog_core::analysis::{self, effect, equivalent, solves, solves_via_transform, Verdict};
use absprog_core::program::{validate_program, ExtensionalProgram};
use absprog_core::semantics::{parse, parse_vardecl, run_all, Budget, Machine, ParseOptions, RunOutcome};
use absprog_core::state_space::{enumerate_states, RenamingMap, State, StateSpace, VarName, DEFAULT_ENUMERATION_BUDGET};
use absprog_core::transforms::{check_identical, IdentityWitness, TransformStep};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use input::{CliError, Source};

#[derive(Parser)]
#[command(name = "absprog", version, about = "Explore, transform and compare abstract programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a program file.
    Check {
        program: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the executions from an initial state.
    Trace {
        program: PathBuf,
        /// Initial state as JSON, e.g. '{"x":0}'. Without it every start state is traced.
        #[arg(long)]
        init: Option<String>,
        /// Every execution (default).
        #[arg(long, conflicts_with = "one")]
        all: bool,
        /// Only the canonically first execution.
        #[arg(long)]
        one: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print the effect relation.
    Effect {
        program: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Check that a program solves a problem.
    Solves {
        problem: PathBuf,
        program: PathBuf,
        /// JSON list of transform steps applied to the program first.
        #[arg(long)]
        transform: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Check that two programs have the same effect.
    Equiv {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Check that a witness transforms two programs into the same program.
    Identical {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Rename, extend, then restrict a program and print it as JSON.
    Transform {
        program: PathBuf,
        /// `old=new`; repeatable or comma-separated.
        #[arg(long, value_delimiter = ',')]
        rename: Vec<String>,
        /// `name:type`, e.g. `k:int[0..1]`; repeatable.
        #[arg(long)]
        extend: Vec<String>,
        /// Comma-separated names of the target subspace.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        restrict: Option<Vec<String>>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: u64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    max_depth: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Let subprogram bodies read and write host variables.
    #[arg(long)]
    allow_globals: bool,
    #[arg(long, default_value_t = analysis::DEFAULT_COUNTEREXAMPLE_LIMIT)]
    limit_counterexamples: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl RunArgs {
    fn budget(&self) -> Budget {
        Budget { max_steps: self.max_steps as usize, max_depth: self.max_depth as usize }
    }

    fn opts(&self) -> ParseOptions {
        ParseOptions { allow_globals: self.allow_globals }
    }

    fn emit(&self, text: String, value: serde_json::Value) {
        let out = match self.format {
            Format::Text => text,
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable")),
        };
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(out.as_bytes());
    }
}

/// Exit status contract: 0 holds/ok, 1 fails/diagnostics, 2 unknown, 3 usage or I/O error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok = 0,
    Fails = 1,
    Unknown = 2,
}

fn verdict_status(v: &Verdict) -> Status {
    match v {
        Verdict::Holds => Status::Ok,
        Verdict::Fails { .. } => Status::Fails,
        Verdict::Unknown { .. } => Status::Unknown,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(s) => ExitCode::from(s as u8),
        Err(CliError::InitState(msg)) => {
            eprintln!("error: invalid initial state: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn run(cmd: Command) -> Result<Status, CliError> {
    match cmd {
        Command::Check { program, run } => check(&program, &run),
        Command::Trace { program, init, all: _, one, run } => trace(&program, init.as_deref(), one, &run),
        Command::Effect { program, run } => {
            let p = input::load_extensional(&program, run.opts(), &run.budget())?;
            let eff = effect(&p);
            report::unknown_warning(&eff.unknown);
            let total = enumerate_states(&p.base, DEFAULT_ENUMERATION_BUDGET)?.len();
            run.emit(report::effect_text(&eff, total), report::effect_json(&eff));
            Ok(Status::Ok)
        }
        Command::Solves { problem, program, transform, run } => {
            let f = input::load_problem(&problem)?;
            let p = input::load_extensional(&program, run.opts(), &run.budget())?;
            let (v, space) = match transform {
                Some(path) => {
                    let steps = input::load_steps(&path)?;
                    let (v, space) = solves_via_transform(&f, &p, &steps, run.limit_counterexamples)?;
                    (v, Some(space))
                }
                None => (solves(&f, &p, run.limit_counterexamples)?, None),
            };
            let mut text = String::new();
            if let Some(s) = &space {
                text.push_str(&format!("transformed base space: {{{s}}}\n"));
            }
            text.push_str(&report::verdict_text(&v));
            run.emit(text, report::verdict_json(&v, space.as_ref()));
            Ok(verdict_status(&v))
        }
        Command::Equiv { left, right, run } => {
            let p = input::load_extensional(&left, run.opts(), &run.budget())?;
            let q = input::load_extensional(&right, run.opts(), &run.budget())?;
            let v = equivalent(&p, &q, run.limit_counterexamples)?;
            run.emit(report::verdict_text(&v), report::verdict_json(&v, None));
            Ok(verdict_status(&v))
        }
        Command::Identical { left, right, witness, run } => {
            let w = witness.as_deref().map(input::load_witness).transpose()?.unwrap_or_default();
            identical(&left, &right, &w, &run)
        }
        Command::Transform { program, rename, extend, restrict, run } => {
            transform(&program, &rename, &extend, restrict.as_deref(), &run)
        }
    }
}

fn check(path: &Path, run: &RunArgs) -> Result<Status, CliError> {
    let text = input::read(path)?;
    let file = path.display().to_string();
    if input::is_json(&text) {
        let p: ExtensionalProgram = match serde_json::from_str(&text) {
            Ok(p) => p,
            Err(e) => {
                let msg = format!("{file}:{}:{}: syntax error: {e}", e.line(), e.column());
                run.emit(format!("{msg}\n"), json!({"file": file, "ok": false, "diagnostics": [msg]}));
                return Ok(Status::Fails);
            }
        };
        let violations = validate_program(&p, DEFAULT_ENUMERATION_BUDGET)?;
        let lines: Vec<String> = violations.iter().map(|v| format!("{file}: {v}")).collect();
        let ok = violations.is_empty();
        let text = if ok { format!("{file}: ok\n") } else { lines.iter().map(|l| format!("{l}\n")).collect() };
        let conditions: Vec<_> = violations.iter().map(|v| json!({"condition": v.condition(), "message": v.to_string()})).collect();
        run.emit(text, json!({"file": file, "ok": ok, "violations": conditions}));
        return Ok(if ok { Status::Ok } else { Status::Fails });
    }
    let (ok, diags) = match parse(&text, run.opts()) {
        Ok(parsed) => (true, parsed.warnings),
        Err(diags) => (false, diags),
    };
    let mut out = input::render_diags(path, &diags);
    if !out.is_empty() {
        out.push('\n');
    }
    if ok {
        out.push_str(&format!("{file}: ok\n"));
    }
    let items: Vec<_> = diags
        .iter()
        .map(|d| json!({"line": d.span.line, "col": d.span.col, "error": d.is_error(), "message": d.to_string()}))
        .collect();
    run.emit(out, json!({"file": file, "ok": ok, "diagnostics": items}));
    Ok(if ok { Status::Ok } else { Status::Fails })
}

fn trace(path: &Path, init: Option<&str>, one: bool, run: &RunArgs) -> Result<Status, CliError> {
    let src = input::load(path, run.opts())?;
    let init: Option<State> =
        init.map(|s| serde_json::from_str(s).map_err(|e| CliError::InitState(e.to_string()))).transpose()?;
    let mut rows: Vec<(State, Vec<RunOutcome>)> = Vec::new();
    match src {
        Source::Table(p) => {
            let starts: Vec<State> = match init {
                Some(a) if p.table.contains_key(&a) => vec![a],
                Some(a) => return Err(CliError::InitState(format!("{a} is not a state of {{{}}}", p.base))),
                None => p.table.keys().cloned().collect(),
            };
            for a in starts {
                let outs = p.table[&a].iter().map(report::execution_outcome).collect();
                rows.push((a, outs));
            }
        }
        Source::Dsl { ast, warnings } => {
            input::warn(path, &warnings);
            let m = Machine::new(&ast, run.opts())?;
            let starts = match init {
                Some(a) => {
                    m.initial(&a).map_err(|e| CliError::InitState(e.to_string()))?;
                    vec![a]
                }
                None => enumerate_states(m.base(), DEFAULT_ENUMERATION_BUDGET)?,
            };
            for a in starts {
                let outs = run_all(&m, &a, &run.budget())?;
                rows.push((a, outs.into_iter().collect()));
            }
        }
    }
    let single = rows.len() == 1;
    let mut text = String::new();
    let mut items = Vec::new();
    for (a, mut outs) in rows {
        if one {
            outs.truncate(1);
        }
        if !single {
            text.push_str(&format!("from {a}:\n"));
        }
        for o in &outs {
            text.push_str(if single { "" } else { "  " });
            text.push_str(&report::outcome_text(o));
            text.push('\n');
        }
        items.push(json!({"from": a, "executions": outs.iter().map(report::outcome_json).collect::<Vec<_>>()}));
    }
    run.emit(text, json!(items));
    Ok(Status::Ok)
}

fn identical(left: &Path, right: &Path, w: &IdentityWitness, run: &RunArgs) -> Result<Status, CliError> {
    let p = input::load_extensional(left, run.opts(), &run.budget())?;
    let q = input::load_extensional(right, run.opts(), &run.budget())?;
    let same = check_identical(&p, &q, w)?;
    let partial = !p.unknown.is_empty() || !q.unknown.is_empty();
    let (status, word) = match (same, partial) {
        (true, _) => (Status::Ok, "identical"),
        (false, false) => (Status::Fails, "not identical"),
        (false, true) => (Status::Unknown, "unknown"),
    };
    let verdict = match status {
        Status::Ok => "holds",
        Status::Fails => "fails",
        Status::Unknown => "unknown",
    };
    run.emit(format!("{word}\n"), json!({"verdict": verdict}));
    Ok(status)
}

fn name(s: &str) -> Result<VarName, CliError> {
    VarName::new(s.trim()).map_err(|e| CliError::Usage(e.to_string()))
}

fn transform(
    path: &Path,
    rename: &[String],
    extend: &[String],
    restrict: Option<&[String]>,
    run: &RunArgs,
) -> Result<Status, CliError> {
    let mut steps = Vec::new();
    if !rename.is_empty() {
        let pairs = rename
            .iter()
            .map(|r| {
                let (a, b) = r.split_once('=').ok_or_else(|| CliError::Usage(format!("--rename expects old=new, got `{r}`")))?;
                Ok((name(a)?, name(b)?))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let base = RenamingMap::new(pairs).map_err(|e| CliError::Usage(e.to_string()))?;
        steps.push(TransformStep::Rename { base, aux: RenamingMap::identity() });
    }
    for e in extend {
        let d = parse_vardecl(e).map_err(|d| CliError::Usage(format!("--extend `{e}`: {d}")))?;
        steps.push(TransformStep::Extend { var: d.name, domain: d.domain });
    }
    let p = input::load_extensional(path, run.opts(), &run.budget())?;
    let mut cur = absprog_core::transforms::apply_steps(&p, &steps)?;
    if let Some(names) = restrict {
        let mut vars = Vec::new();
        for n in names {
            let n = name(n)?;
            let d = cur.base.domain(&n).cloned().ok_or_else(|| {
                CliError::Usage(format!("cannot restrict to `{n}`: not a base variable of {{{}}}", cur.base))
            })?;
            vars.push((n, d));
        }
        let step = TransformStep::Restrict { space: StateSpace::new(vars) };
        cur = step.apply(&cur)?;
    }
    let out = format!("{}\n", serde_json::to_string_pretty(&cur).expect("serializable"));
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    Ok(Status::Ok)
}
