//! The command language: parsing, checking, printing, rewriting, and a
//! nondeterministic small-step machine that turns programs into executions.

pub mod ast;
pub mod check;
pub mod diag;
pub mod eval;
pub mod lexer;
pub mod machine;
mod parser;
pub mod pretty;
pub mod rewrite;

use thiserror::Error;

pub use ast::{Expr, ProgramAst, Stmt, VarDecl};
pub use check::ParseOptions;
pub use diag::{DiagKind, Diagnostic};
pub use machine::{run_all, to_extensional, Budget, Machine, RunOutcome};
pub use pretty::{print_expr, print_program};
pub use rewrite::{desugar_call_expressions, inline_calls};

use crate::state_space::{SpaceError, State, StateSpace, VarName};
use parser::Parser;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("`{sub}` is used in an expression but has {outputs} output parameters")]
    MultiOutputCallee { sub: VarName, outputs: usize },
    #[error("subprograms call each other recursively: {}", cycle.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(" -> "))]
    RecursiveCallGraph { cycle: Vec<VarName> },
    #[error("unknown subprogram `{0}`")]
    UnknownSubprogram(VarName),
    #[error("{0} is not a state of the declared space")]
    UnknownState(State),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A checked program plus any lint warnings.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub ast: ProgramAst,
    pub warnings: Vec<Diagnostic>,
}

/// Parses and checks a program. On failure every diagnostic is returned, warnings included.
pub fn parse(text: &str, opts: ParseOptions) -> Result<Parsed, Vec<Diagnostic>> {
    let mut ast = Parser::new(text).and_then(|mut p| p.program()).map_err(|d| vec![d])?;
    let diags = check::check_program(&mut ast, opts);
    if diags.iter().any(Diagnostic::is_error) {
        return Err(diags);
    }
    Ok(Parsed { ast, warnings: diags })
}

/// Parses an expression without checking it; identifiers stay variables.
pub fn parse_expr(text: &str) -> Result<Expr, Diagnostic> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses and checks a boolean predicate over `space`. Primed names are
/// accepted only when `allow_post` is set.
pub fn parse_predicate(text: &str, space: &StateSpace, allow_post: bool) -> Result<Expr, Vec<Diagnostic>> {
    let mut e = parse_expr(text).map_err(|d| vec![d])?;
    let diags = check::check_predicate(&mut e, space, allow_post);
    if diags.is_empty() {
        Ok(e)
    } else {
        Err(diags)
    }
}

/// Parses `name: type`.
pub fn parse_vardecl(text: &str) -> Result<VarDecl, Diagnostic> {
    let mut p = Parser::new(text)?;
    let d = p.vardecl()?;
    p.expect_eof()?;
    Ok(d)
}
