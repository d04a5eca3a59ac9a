//! Pretty printer. Output re-parses to a structurally equal tree and uses the
//! fewest parentheses the grammar allows.

use std::fmt::Write;

use super::ast::*;
use crate::state_space::Domain;

const INDENT: &str = "  ";

pub fn print_program(p: &ProgramAst) -> String {
    let mut out = String::from("space ");
    out.push_str(&decls(&p.space));
    out.push('\n');
    for s in &p.subs {
        let _ = writeln!(out, "sub ({}) := {}({})", decls(&s.outs), s.name, decls(&s.ins));
        stmt(&mut out, &s.body, 1);
        out.push_str("end\n");
    }
    out.push_str("begin\n");
    stmt(&mut out, &p.body, 1);
    out.push_str("end\n");
    out
}

pub fn print_stmt(s: &Stmt) -> String {
    let mut out = String::new();
    stmt(&mut out, s, 0);
    out
}

pub fn print_domain(d: &Domain) -> String {
    match d {
        Domain::Bool => "bool".into(),
        Domain::Int { min, max } => format!("int[{min}..{max}]"),
        Domain::Enum { labels } => format!("enum{{{}}}", labels.join(", ")),
    }
}

pub fn print_decl(d: &VarDecl) -> String {
    format!("{}: {}", d.name, print_domain(&d.domain))
}

fn decls(ds: &[VarDecl]) -> String {
    ds.iter().map(print_decl).collect::<Vec<_>>().join(", ")
}

fn pad(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn list<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

/// Writes `s` as indented lines at `depth`.
fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    match &s.kind {
        StmtKind::Seq(ss) => {
            for (i, s) in ss.iter().enumerate() {
                stmt(out, s, depth);
                if i + 1 < ss.len() {
                    // Attach the separator to the previous line.
                    out.pop();
                    out.push_str(";\n");
                }
            }
        }
        StmtKind::Skip => {
            pad(out, depth);
            out.push_str("skip\n");
        }
        StmtKind::Assign { targets, values } => {
            pad(out, depth);
            let _ = writeln!(out, "{} := {}", list(targets, |t| t.to_string()), list(values, print_expr));
        }
        StmtKind::Call { outputs, sub, inputs } => {
            pad(out, depth);
            let _ = writeln!(out, "({}) := {sub}({})", list(outputs, |t| t.to_string()), list(inputs, print_expr));
        }
        StmtKind::If(arms) => {
            for (i, (g, body)) in arms.iter().enumerate() {
                pad(out, depth);
                let _ = writeln!(out, "{} {} ->", if i == 0 { "if" } else { "[]" }, print_expr(g));
                stmt(out, body, depth + 1);
            }
            pad(out, depth);
            out.push_str("fi\n");
        }
        StmtKind::While { guard, body } => {
            pad(out, depth);
            let _ = writeln!(out, "while {} do", print_expr(guard));
            stmt(out, body, depth + 1);
            pad(out, depth);
            out.push_str("od\n");
        }
        StmtKind::Choose(arms) => {
            for (i, body) in arms.iter().enumerate() {
                pad(out, depth);
                out.push_str(if i == 0 { "choose\n" } else { "[]\n" });
                stmt(out, body, depth + 1);
            }
            pad(out, depth);
            out.push_str("endchoose\n");
        }
        StmtKind::Var { decl, init, body } => {
            pad(out, depth);
            let _ = writeln!(out, "var {} := {} in", print_decl(decl), print_expr(init));
            stmt(out, body, depth + 1);
            pad(out, depth);
            out.push_str("end\n");
        }
    }
}

const ATOM: u8 = 8;
const UNARY: u8 = 7;
const NOT: u8 = 3;

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Int(i) if *i < 0 => UNARY,
        ExprKind::Unary(UnOp::Neg, _) => UNARY,
        ExprKind::Unary(UnOp::Not, _) => NOT,
        ExprKind::Binary(op, ..) => op.precedence(),
        _ => ATOM,
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e);
    out
}

fn wrapped(out: &mut String, e: &Expr, min: u8) {
    if level(e) < min {
        out.push('(');
        expr(out, e);
        out.push(')');
    } else {
        expr(out, e);
    }
}

fn expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int(i) => {
            let _ = write!(out, "{i}");
        }
        ExprKind::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        ExprKind::Var(n) => out.push_str(n.as_str()),
        ExprKind::Post(n) => {
            let _ = write!(out, "{n}'");
        }
        ExprKind::Label(l) => out.push_str(l),
        ExprKind::Unary(UnOp::Neg, inner) => {
            out.push('-');
            // `-3` would read back as a literal, so a negated literal keeps its parentheses.
            if matches!(inner.kind, ExprKind::Int(i) if i >= 0) {
                out.push('(');
                expr(out, inner);
                out.push(')');
            } else {
                wrapped(out, inner, UNARY);
            }
        }
        ExprKind::Unary(UnOp::Not, inner) => {
            out.push_str("not ");
            wrapped(out, inner, NOT);
        }
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            let (lmin, rmin) = if op.is_comparison() { (p + 1, p + 1) } else { (p, p + 1) };
            wrapped(out, l, lmin);
            let _ = write!(out, " {} ", op.symbol());
            wrapped(out, r, rmin);
        }
        ExprKind::Call(f, args) => {
            let _ = write!(out, "{f}({})", list(args, print_expr));
        }
    }
}
