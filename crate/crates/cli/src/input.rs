//! Reading program, problem, and witness files.

use std::fs;
use std::path::{Path, PathBuf};

use absprog_core::analysis::{AnalysisError, ProblemSpec};
use absprog_core::program::{validate_program, ExtensionalProgram, Problem, Violation};
use absprog_core::semantics::{parse, to_extensional, Budget, Diagnostic, Machine, ParseOptions, ProgramAst, SemanticsError};
use absprog_core::state_space::{SpaceError, DEFAULT_ENUMERATION_BUDGET};
use absprog_core::transforms::{IdentityWitness, TransformError, TransformStep};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: invalid JSON: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}", render_diags(path, diags))]
    Diagnostics { path: PathBuf, diags: Vec<Diagnostic> },
    #[error("{}: not a valid program:\n  {}", path.display(), violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n  "))]
    InvalidProgram { path: PathBuf, violations: Vec<Violation> },
    #[error("invalid initial state: {0}")]
    InitState(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

pub fn render_diags(path: &Path, diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{}:{d}", path.display())).collect::<Vec<_>>().join("\n")
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|source| CliError::Json { path: path.to_owned(), source })
}

/// A program file: DSL text, or an extensional program in JSON when the
/// first non-blank character is `{`.
pub enum Source {
    Dsl { ast: ProgramAst, warnings: Vec<Diagnostic> },
    Table(ExtensionalProgram),
}

pub fn is_json(text: &str) -> bool {
    text.trim_start().starts_with('{')
}

/// Loads a program without validating extensional tables.
pub fn load_unchecked(path: &Path, opts: ParseOptions) -> Result<Source, CliError> {
    let text = read(path)?;
    if is_json(&text) {
        Ok(Source::Table(json(path, &text)?))
    } else {
        let parsed = parse(&text, opts).map_err(|diags| CliError::Diagnostics { path: path.to_owned(), diags })?;
        Ok(Source::Dsl { ast: parsed.ast, warnings: parsed.warnings })
    }
}

pub fn load(path: &Path, opts: ParseOptions) -> Result<Source, CliError> {
    let src = load_unchecked(path, opts)?;
    if let Source::Table(p) = &src {
        let violations = validate_program(p, DEFAULT_ENUMERATION_BUDGET)?;
        if !violations.is_empty() {
            return Err(CliError::InvalidProgram { path: path.to_owned(), violations });
        }
    }
    Ok(src)
}

/// Loads a program and explores it from every start state.
pub fn load_extensional(path: &Path, opts: ParseOptions, budget: &Budget) -> Result<ExtensionalProgram, CliError> {
    match load(path, opts)? {
        Source::Table(p) => Ok(p),
        Source::Dsl { ast, warnings } => {
            warn(path, &warnings);
            let m = Machine::new(&ast, opts)?;
            Ok(to_extensional(&m, budget, DEFAULT_ENUMERATION_BUDGET)?)
        }
    }
}

pub fn warn(path: &Path, warnings: &[Diagnostic]) {
    if !warnings.is_empty() {
        eprintln!("{}", render_diags(path, warnings));
    }
}

pub fn load_problem(path: &Path) -> Result<Problem, CliError> {
    let spec: ProblemSpec = json(path, &read(path)?)?;
    Ok(spec.expand(DEFAULT_ENUMERATION_BUDGET)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StepsFile {
    Steps(Vec<TransformStep>),
    Witness(IdentityWitness),
}

/// A step list, or a witness object whose `left` side is used.
pub fn load_steps(path: &Path) -> Result<Vec<TransformStep>, CliError> {
    Ok(match json(path, &read(path)?)? {
        StepsFile::Steps(s) => s,
        StepsFile::Witness(w) => w.left,
    })
}

pub fn load_witness(path: &Path) -> Result<IdentityWitness, CliError> {
    json(path, &read(path)?)
}
