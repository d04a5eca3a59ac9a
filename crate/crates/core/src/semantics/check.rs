//! Scope and type rules.
//!
//! Besides reporting errors, checking resolves identifiers that name enum
//! labels (and are not variables in scope) from `Var` to `Label`.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::diag::{DiagKind, Diagnostic};
use crate::state_space::{Domain, StateSpace, VarName};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Let subprogram bodies read and write the base variables of the main program.
    pub allow_globals: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Bool,
    Int,
    Enum,
}

impl Ty {
    pub fn of(d: &Domain) -> Ty {
        match d {
            Domain::Bool => Ty::Bool,
            Domain::Int { .. } => Ty::Int,
            Domain::Enum { .. } => Ty::Enum,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Ty::Bool => "bool",
            Ty::Int => "int",
            Ty::Enum => "enum",
        }
    }
}

struct Signature {
    outs: Vec<Domain>,
    ins: Vec<Domain>,
}

struct Checker {
    labels: BTreeSet<String>,
    subs: BTreeMap<VarName, Signature>,
    diags: Vec<Diagnostic>,
}

/// Variables visible at a program point, with their domains.
#[derive(Default, Clone)]
struct Scope {
    vars: Vec<(VarName, Domain)>,
}

impl Scope {
    fn get(&self, n: &VarName) -> Option<&Domain> {
        self.vars.iter().rev().find(|(m, _)| m == n).map(|(_, d)| d)
    }
}

/// Checks a parsed program in place; returns errors and lint warnings.
pub fn check_program(ast: &mut ProgramAst, opts: ParseOptions) -> Vec<Diagnostic> {
    let mut labels = BTreeSet::new();
    let mut all_decls: Vec<&VarDecl> = ast.space.iter().collect();
    for s in &ast.subs {
        all_decls.extend(s.formals());
    }
    collect_stmt_decls(&ast.body, &mut all_decls);
    for s in &ast.subs {
        collect_stmt_decls(&s.body, &mut all_decls);
    }
    for d in &all_decls {
        if let Domain::Enum { labels: ls } = &d.domain {
            labels.extend(ls.iter().cloned());
        }
    }
    let mut ck = Checker { labels, subs: BTreeMap::new(), diags: Vec::new() };

    let mut base = Scope::default();
    for d in &ast.space {
        if base.get(&d.name).is_some() {
            ck.err(DiagKind::Scope, d.span, format!("base variable `{}` declared twice", d.name));
        }
        ck.check_decl_name(d);
        base.vars.push((d.name.clone(), d.domain.clone()));
    }
    for s in &ast.subs {
        if ck.subs.contains_key(&s.name) {
            ck.err(DiagKind::Scope, s.span, format!("subprogram `{}` declared twice", s.name));
            continue;
        }
        ck.subs.insert(
            s.name.clone(),
            Signature {
                outs: s.outs.iter().map(|d| d.domain.clone()).collect(),
                ins: s.ins.iter().map(|d| d.domain.clone()).collect(),
            },
        );
    }
    for s in &mut ast.subs {
        let mut scope = if opts.allow_globals { base.clone() } else { Scope::default() };
        let mut seen = BTreeSet::new();
        for d in s.outs.iter().chain(&s.ins) {
            if !seen.insert(d.name.clone()) {
                ck.err(DiagKind::Scope, d.span, format!("parameter `{}` occurs twice in the head of `{}`", d.name, s.name));
            } else if scope.get(&d.name).is_some() {
                ck.err(DiagKind::Shadowing, d.span, format!("parameter `{}` shadows a global variable", d.name));
            }
            ck.check_decl_name(d);
            scope.vars.push((d.name.clone(), d.domain.clone()));
        }
        ck.stmt(&mut s.body, &mut scope);
    }
    ck.stmt(&mut ast.body, &mut base);
    ck.diags
}

/// Checks a problem predicate over `space`; primed names are allowed iff `allow_post`.
pub fn check_predicate(e: &mut Expr, space: &StateSpace, allow_post: bool) -> Vec<Diagnostic> {
    let labels = space
        .vars()
        .values()
        .filter_map(|d| match d {
            Domain::Enum { labels } => Some(labels.iter().cloned()),
            _ => None,
        })
        .flatten()
        .collect();
    let mut ck = Checker { labels, subs: BTreeMap::new(), diags: Vec::new() };
    let scope = Scope { vars: space.vars().iter().map(|(n, d)| (n.clone(), d.clone())).collect() };
    let post = allow_post.then_some(space);
    if let Some(t) = ck.expr(e, &scope, post) {
        if t != Ty::Bool {
            ck.err(DiagKind::Type, e.span, format!("predicate has type {}, expected bool", t.name()));
        }
    }
    ck.diags
}

fn collect_stmt_decls<'a>(s: &'a Stmt, out: &mut Vec<&'a VarDecl>) {
    match &s.kind {
        StmtKind::Seq(ss) | StmtKind::Choose(ss) => ss.iter().for_each(|s| collect_stmt_decls(s, out)),
        StmtKind::If(arms) => arms.iter().for_each(|(_, s)| collect_stmt_decls(s, out)),
        StmtKind::While { body, .. } => collect_stmt_decls(body, out),
        StmtKind::Var { decl, body, .. } => {
            out.push(decl);
            collect_stmt_decls(body, out);
        }
        StmtKind::Skip | StmtKind::Assign { .. } | StmtKind::Call { .. } => {}
    }
}

impl Checker {
    fn err(&mut self, kind: DiagKind, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(kind, span, msg));
    }

    fn check_decl_name(&mut self, d: &VarDecl) {
        if self.labels.contains(d.name.as_str()) {
            self.err(DiagKind::Scope, d.span, format!("variable `{}` has the name of an enum label", d.name));
        }
    }

    fn stmt(&mut self, s: &mut Stmt, scope: &mut Scope) {
        let span = s.span;
        match &mut s.kind {
            StmtKind::Skip => {}
            StmtKind::Assign { targets, values } => {
                let mut seen = BTreeSet::new();
                for t in targets.iter() {
                    if !seen.insert(t.clone()) {
                        self.err(DiagKind::DuplicateTarget, span, format!("`{t}` is assigned twice"));
                    }
                }
                if targets.len() != values.len() {
                    self.err(
                        DiagKind::Arity,
                        span,
                        format!("{} targets but {} values", targets.len(), values.len()),
                    );
                }
                let tys: Vec<Option<Ty>> = values.iter_mut().map(|v| self.expr(v, scope, None)).collect();
                for (t, ty) in targets.iter().zip(tys) {
                    match scope.get(t) {
                        None => self.err(DiagKind::Scope, span, format!("unknown variable `{t}`")),
                        Some(d) => {
                            if let Some(ty) = ty {
                                if ty != Ty::of(d) {
                                    self.err(
                                        DiagKind::Type,
                                        span,
                                        format!("cannot assign {} to `{t}` of type {d}", ty.name()),
                                    );
                                }
                            }
                        }
                    }
                }
            }
            StmtKind::Seq(ss) | StmtKind::Choose(ss) => ss.iter_mut().for_each(|s| self.stmt(s, scope)),
            StmtKind::If(arms) => {
                for (g, body) in arms.iter_mut() {
                    self.guard(g, scope);
                    self.stmt(body, scope);
                }
            }
            StmtKind::While { guard, body } => {
                self.guard(guard, scope);
                self.stmt(body, scope);
            }
            StmtKind::Var { decl, init, body } => {
                if let Some(t) = self.expr(init, scope, None) {
                    if t != Ty::of(&decl.domain) {
                        self.err(
                            DiagKind::Type,
                            init.span,
                            format!("initial value of `{}` has type {}, expected {}", decl.name, t.name(), decl.domain),
                        );
                    }
                }
                if scope.get(&decl.name).is_some() {
                    self.err(DiagKind::Shadowing, decl.span, format!("local `{}` shadows a variable in scope", decl.name));
                }
                self.check_decl_name(decl);
                scope.vars.push((decl.name.clone(), decl.domain.clone()));
                self.stmt(body, scope);
                scope.vars.pop();
            }
            StmtKind::Call { outputs, sub, inputs } => {
                let tys: Vec<Option<Ty>> = inputs.iter_mut().map(|e| self.expr(e, scope, None)).collect();
                let mut seen = BTreeSet::new();
                for o in outputs.iter() {
                    if !seen.insert(o.clone()) {
                        self.err(DiagKind::DuplicateTarget, span, format!("output argument `{o}` occurs twice"));
                    }
                    if scope.get(o).is_none() {
                        self.err(DiagKind::Scope, span, format!("unknown variable `{o}`"));
                    }
                }
                for o in outputs.iter() {
                    if inputs.iter().any(|e| e.mentions(o)) {
                        self.err(
                            DiagKind::Lint,
                            span,
                            format!("`{o}` is passed both as input and as output argument"),
                        );
                    }
                }
                let Some(sig) = self.subs.get(sub) else {
                    self.err(DiagKind::Scope, span, format!("unknown subprogram `{sub}`"));
                    return;
                };
                let (sig_outs, sig_ins) = (sig.outs.clone(), sig.ins.clone());
                if sig_outs.len() != outputs.len() || sig_ins.len() != inputs.len() {
                    self.err(
                        DiagKind::Arity,
                        span,
                        format!(
                            "`{sub}` takes {} output and {} input parameters, called with {} and {}",
                            sig_outs.len(),
                            sig_ins.len(),
                            outputs.len(),
                            inputs.len()
                        ),
                    );
                    return;
                }
                for (o, d) in outputs.iter().zip(&sig_outs) {
                    if let Some(od) = scope.get(o) {
                        if Ty::of(od) != Ty::of(d) {
                            self.err(DiagKind::Type, span, format!("output argument `{o}` has type {od}, parameter has {d}"));
                        }
                    }
                }
                for (i, (t, d)) in tys.iter().zip(&sig_ins).enumerate() {
                    if let Some(t) = t {
                        if *t != Ty::of(d) {
                            self.err(
                                DiagKind::Type,
                                inputs[i].span,
                                format!("input argument {} has type {}, parameter has {d}", i + 1, t.name()),
                            );
                        }
                    }
                }
            }
        }
    }

    fn guard(&mut self, g: &mut Expr, scope: &Scope) {
        if let Some(t) = self.expr(g, scope, None) {
            if t != Ty::Bool {
                self.err(DiagKind::Type, g.span, format!("guard has type {}, expected bool", t.name()));
            }
        }
    }

    fn expr(&mut self, e: &mut Expr, scope: &Scope, post: Option<&StateSpace>) -> Option<Ty> {
        let span = e.span;
        match &mut e.kind {
            ExprKind::Int(_) => Some(Ty::Int),
            ExprKind::Bool(_) => Some(Ty::Bool),
            ExprKind::Label(l) => {
                if self.labels.contains(l.as_str()) {
                    Some(Ty::Enum)
                } else {
                    self.err(DiagKind::Scope, span, format!("unknown enum label `{l}`"));
                    None
                }
            }
            ExprKind::Var(n) => {
                if let Some(d) = scope.get(n) {
                    Some(Ty::of(d))
                } else if self.labels.contains(n.as_str()) {
                    e.kind = ExprKind::Label(n.to_string());
                    Some(Ty::Enum)
                } else {
                    self.err(DiagKind::Scope, span, format!("unknown variable `{n}`"));
                    None
                }
            }
            ExprKind::Post(n) => match post.and_then(|s| s.domain(n)) {
                Some(d) => Some(Ty::of(d)),
                None if post.is_none() => {
                    self.err(DiagKind::Scope, span, format!("primed name `{n}'` is only allowed in postconditions"));
                    None
                }
                None => {
                    self.err(DiagKind::Scope, span, format!("unknown variable `{n}'`"));
                    None
                }
            },
            ExprKind::Unary(op, inner) => {
                let want = match op {
                    UnOp::Neg => Ty::Int,
                    UnOp::Not => Ty::Bool,
                };
                let t = self.expr(inner, scope, post)?;
                if t != want {
                    self.err(DiagKind::Type, span, format!("operand has type {}, expected {}", t.name(), want.name()));
                    return None;
                }
                Some(want)
            }
            ExprKind::Binary(op, l, r) => {
                let op = *op;
                let lt = self.expr(l, scope, post);
                let rt = self.expr(r, scope, post);
                let (lt, rt) = (lt?, rt?);
                let (operand, result) = match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => (Some(Ty::Int), Ty::Int),
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => (Some(Ty::Int), Ty::Bool),
                    BinOp::And | BinOp::Or => (Some(Ty::Bool), Ty::Bool),
                    BinOp::Eq | BinOp::Ne => (None, Ty::Bool),
                };
                let ok = match operand {
                    Some(t) => lt == t && rt == t,
                    None => lt == rt,
                };
                if !ok {
                    self.err(
                        DiagKind::Type,
                        span,
                        format!("`{}` applied to {} and {}", op.symbol(), lt.name(), rt.name()),
                    );
                    return None;
                }
                Some(result)
            }
            ExprKind::Call(f, args) => {
                let f = f.clone();
                let tys: Vec<Option<Ty>> = args.iter_mut().map(|a| self.expr(a, scope, post)).collect();
                let Some(sig) = self.subs.get(&f) else {
                    self.err(DiagKind::Scope, span, format!("unknown subprogram `{f}`"));
                    return None;
                };
                let (outs, ins) = (sig.outs.clone(), sig.ins.clone());
                if outs.len() != 1 {
                    self.err(
                        DiagKind::Arity,
                        span,
                        format!("`{f}` has {} output parameters; a call expression needs exactly one", outs.len()),
                    );
                    return None;
                }
                if ins.len() != args.len() {
                    self.err(
                        DiagKind::Arity,
                        span,
                        format!("`{f}` takes {} input parameters, called with {}", ins.len(), args.len()),
                    );
                    return None;
                }
                for (i, (t, d)) in tys.iter().zip(&ins).enumerate() {
                    if let Some(t) = t {
                        if *t != Ty::of(d) {
                            self.err(
                                DiagKind::Type,
                                span,
                                format!("input argument {} of `{f}` has type {}, parameter has {d}", i + 1, t.name()),
                            );
                        }
                    }
                }
                Some(Ty::of(&outs[0]))
            }
        }
    }
}
