//! Source-to-source rewrites: hoisting call expressions and inlining calls.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::SemanticsError;
use crate::state_space::{Domain, VarName};

/// Hands out names that collide with nothing in the program or with each other.
struct Fresh {
    taken: BTreeSet<VarName>,
}

impl Fresh {
    fn new(ast: &ProgramAst) -> Self {
        Fresh { taken: ast.names() }
    }

    fn next(&mut self, base: &VarName) -> VarName {
        let n = base.fresh_suffixed(|n| self.taken.contains(n));
        self.taken.insert(n.clone());
        n
    }
}

fn temp_base() -> VarName {
    VarName::new("t").expect("valid name")
}

/// Replaces every call expression by a temporary local that a call statement
/// fills in just before the containing statement. Calls are hoisted left to
/// right, arguments before the call that consumes them. A `while` guard with
/// calls is re-evaluated by repeating the hoisted calls at the end of the body.
pub fn desugar_call_expressions(ast: &ProgramAst) -> Result<ProgramAst, SemanticsError> {
    let outs: BTreeMap<VarName, Vec<Domain>> =
        ast.subs.iter().map(|s| (s.name.clone(), s.outs.iter().map(|d| d.domain.clone()).collect())).collect();
    let mut d = Desugar { outs: &outs, fresh: Fresh::new(ast) };
    let subs = ast
        .subs
        .iter()
        .map(|s| Ok(SubDecl { body: d.stmt(&s.body)?, ..s.clone() }))
        .collect::<Result<_, SemanticsError>>()?;
    let body = d.stmt(&ast.body)?;
    Ok(ProgramAst { space: ast.space.clone(), subs, body })
}

struct Desugar<'a> {
    outs: &'a BTreeMap<VarName, Vec<Domain>>,
    fresh: Fresh,
}

/// Calls hoisted out of one statement, with the temporaries they fill.
#[derive(Default)]
struct Hoisted {
    temps: Vec<VarDecl>,
    calls: Vec<Stmt>,
}

impl Hoisted {
    /// `var t1 := .. in var t2 := .. in calls; inner end end`
    fn wrap(self, inner: Stmt) -> Stmt {
        let mut body = Stmt::seq(self.calls.into_iter().chain(std::iter::once(inner)).collect());
        for t in self.temps.into_iter().rev() {
            let init = Expr::literal(&t.domain.first()).expect("carrier value");
            body = Stmt::var(t, init, body);
        }
        body
    }
}

impl Desugar<'_> {
    fn expr(&mut self, e: &Expr, h: &mut Hoisted) -> Result<Expr, SemanticsError> {
        let kind = match &e.kind {
            ExprKind::Unary(op, inner) => ExprKind::Unary(*op, Box::new(self.expr(inner, h)?)),
            ExprKind::Binary(op, l, r) => {
                let l = self.expr(l, h)?;
                ExprKind::Binary(*op, Box::new(l), Box::new(self.expr(r, h)?))
            }
            ExprKind::Call(f, args) => {
                let args = args.iter().map(|a| self.expr(a, h)).collect::<Result<Vec<_>, _>>()?;
                let outs = self.outs.get(f).ok_or_else(|| SemanticsError::UnknownSubprogram(f.clone()))?;
                if outs.len() != 1 {
                    return Err(SemanticsError::MultiOutputCallee { sub: f.clone(), outputs: outs.len() });
                }
                let t = self.fresh.next(&temp_base());
                h.temps.push(VarDecl::new(t.clone(), outs[0].clone()));
                h.calls.push(Stmt::call(vec![t.clone()], f.clone(), args));
                ExprKind::Var(t)
            }
            other => other.clone(),
        };
        Ok(Expr { kind, span: e.span })
    }

    fn exprs(&mut self, es: &[Expr], h: &mut Hoisted) -> Result<Vec<Expr>, SemanticsError> {
        es.iter().map(|e| self.expr(e, h)).collect()
    }

    fn stmt(&mut self, s: &Stmt) -> Result<Stmt, SemanticsError> {
        if !s.has_calls() {
            return Ok(s.clone());
        }
        let mut h = Hoisted::default();
        let kind = match &s.kind {
            StmtKind::Skip => StmtKind::Skip,
            StmtKind::Assign { targets, values } => {
                StmtKind::Assign { targets: targets.clone(), values: self.exprs(values, &mut h)? }
            }
            StmtKind::Call { outputs, sub, inputs } => {
                StmtKind::Call { outputs: outputs.clone(), sub: sub.clone(), inputs: self.exprs(inputs, &mut h)? }
            }
            StmtKind::Seq(ss) => StmtKind::Seq(ss.iter().map(|s| self.stmt(s)).collect::<Result<_, _>>()?),
            StmtKind::Choose(ss) => StmtKind::Choose(ss.iter().map(|s| self.stmt(s)).collect::<Result<_, _>>()?),
            StmtKind::If(arms) => {
                let guards = arms.iter().map(|(g, _)| self.expr(g, &mut h)).collect::<Result<Vec<_>, _>>()?;
                let bodies = arms.iter().map(|(_, b)| self.stmt(b)).collect::<Result<Vec<_>, _>>()?;
                StmtKind::If(guards.into_iter().zip(bodies).collect())
            }
            StmtKind::While { guard, body } => {
                let guard = self.expr(guard, &mut h)?;
                let body = self.stmt(body)?;
                let body = Stmt::seq(std::iter::once(body).chain(h.calls.iter().cloned()).collect());
                StmtKind::While { guard, body: Box::new(body) }
            }
            StmtKind::Var { decl, init, body } => StmtKind::Var {
                decl: decl.clone(),
                init: self.expr(init, &mut h)?,
                body: Box::new(self.stmt(body)?),
            },
        };
        Ok(h.wrap(Stmt { kind, span: s.span }))
    }
}

/// Replaces every call statement by blocks that create renamed copies of the
/// formals, run a renamed copy of the body, copy the outputs back, and destroy
/// the copies. The result declares no subprograms.
pub fn inline_calls(ast: &ProgramAst) -> Result<ProgramAst, SemanticsError> {
    let d = desugar_call_expressions(ast)?;
    if let Some(cycle) = call_cycle(&d) {
        return Err(SemanticsError::RecursiveCallGraph { cycle });
    }
    let mut inl = Inliner { ast: &d, fresh: Fresh::new(&d) };
    let body = inl.stmt(&d.body)?;
    Ok(ProgramAst { space: d.space.clone(), subs: Vec::new(), body })
}

/// A cycle in the call graph, as a path whose first and last names agree.
fn call_cycle(ast: &ProgramAst) -> Option<Vec<VarName>> {
    let graph: BTreeMap<&VarName, BTreeSet<VarName>> = ast
        .subs
        .iter()
        .map(|s| {
            let mut out = BTreeSet::new();
            s.body.callees(&mut out);
            (&s.name, out)
        })
        .collect();
    fn visit<'a>(
        n: &'a VarName,
        graph: &'a BTreeMap<&VarName, BTreeSet<VarName>>,
        path: &mut Vec<&'a VarName>,
        done: &mut BTreeSet<&'a VarName>,
    ) -> Option<Vec<VarName>> {
        if let Some(i) = path.iter().position(|m| *m == n) {
            let mut cycle: Vec<VarName> = path[i..].iter().map(|m| (*m).clone()).collect();
            cycle.push(n.clone());
            return Some(cycle);
        }
        if done.contains(n) {
            return None;
        }
        path.push(n);
        for m in graph.get(n).into_iter().flatten() {
            if let Some(c) = visit(m, graph, path, done) {
                return Some(c);
            }
        }
        path.pop();
        done.insert(n);
        None
    }
    let mut done = BTreeSet::new();
    graph.keys().find_map(|n| visit(n, &graph, &mut Vec::new(), &mut done))
}

struct Inliner<'a> {
    ast: &'a ProgramAst,
    fresh: Fresh,
}

impl Inliner<'_> {
    fn stmt(&mut self, s: &Stmt) -> Result<Stmt, SemanticsError> {
        let kind = match &s.kind {
            StmtKind::Call { outputs, sub, inputs } => return self.expand(outputs, sub, inputs),
            StmtKind::Seq(ss) => StmtKind::Seq(ss.iter().map(|s| self.stmt(s)).collect::<Result<_, _>>()?),
            StmtKind::Choose(ss) => StmtKind::Choose(ss.iter().map(|s| self.stmt(s)).collect::<Result<_, _>>()?),
            StmtKind::If(arms) => StmtKind::If(
                arms.iter().map(|(g, b)| Ok((g.clone(), self.stmt(b)?))).collect::<Result<_, SemanticsError>>()?,
            ),
            StmtKind::While { guard, body } => {
                StmtKind::While { guard: guard.clone(), body: Box::new(self.stmt(body)?) }
            }
            StmtKind::Var { decl, init, body } => {
                StmtKind::Var { decl: decl.clone(), init: init.clone(), body: Box::new(self.stmt(body)?) }
            }
            StmtKind::Skip | StmtKind::Assign { .. } => return Ok(s.clone()),
        };
        Ok(Stmt { kind, span: s.span })
    }

    fn expand(&mut self, outputs: &[VarName], sub: &VarName, inputs: &[Expr]) -> Result<Stmt, SemanticsError> {
        let decl = self.ast.sub(sub).ok_or_else(|| SemanticsError::UnknownSubprogram(sub.clone()))?;
        let mut declared = Vec::new();
        declared.extend(decl.formals().map(|d| d.name.clone()));
        collect_locals(&decl.body, &mut declared);
        let map: BTreeMap<VarName, VarName> = declared.iter().map(|n| (n.clone(), self.fresh.next(n))).collect();
        let body = rename_stmt(&decl.body, &map);

        let mut prelude = Vec::new();
        for o in &decl.outs {
            if !written_before_read(&body, &map[&o.name]) {
                let arms = o
                    .domain
                    .carrier()
                    .iter()
                    .map(|v| Stmt::assign(vec![map[&o.name].clone()], vec![Expr::literal(v).expect("carrier value")]))
                    .collect();
                prelude.push(Stmt::new(StmtKind::Choose(arms)));
            }
        }
        let body = self.stmt(&body)?;
        let copy_out =
            Stmt::assign(outputs.to_vec(), decl.outs.iter().map(|o| Expr::var(map[&o.name].clone())).collect());
        let mut block = Stmt::seq(prelude.into_iter().chain([body, copy_out]).collect());
        for o in decl.outs.iter().rev() {
            let init = Expr::literal(&o.domain.first()).expect("carrier value");
            block = Stmt::var(VarDecl::new(map[&o.name].clone(), o.domain.clone()), init, block);
        }
        for (p, e) in decl.ins.iter().zip(inputs).rev() {
            block = Stmt::var(VarDecl::new(map[&p.name].clone(), p.domain.clone()), e.clone(), block);
        }
        Ok(block)
    }
}

fn collect_locals(s: &Stmt, out: &mut Vec<VarName>) {
    match &s.kind {
        StmtKind::Seq(ss) | StmtKind::Choose(ss) => ss.iter().for_each(|s| collect_locals(s, out)),
        StmtKind::If(arms) => arms.iter().for_each(|(_, s)| collect_locals(s, out)),
        StmtKind::While { body, .. } => collect_locals(body, out),
        StmtKind::Var { decl, body, .. } => {
            out.push(decl.name.clone());
            collect_locals(body, out);
        }
        StmtKind::Skip | StmtKind::Assign { .. } | StmtKind::Call { .. } => {}
    }
}

fn rename_name(n: &VarName, map: &BTreeMap<VarName, VarName>) -> VarName {
    map.get(n).unwrap_or(n).clone()
}

fn rename_expr(e: &Expr, map: &BTreeMap<VarName, VarName>) -> Expr {
    let kind = match &e.kind {
        ExprKind::Var(n) => ExprKind::Var(rename_name(n, map)),
        ExprKind::Post(n) => ExprKind::Post(rename_name(n, map)),
        ExprKind::Unary(op, inner) => ExprKind::Unary(*op, Box::new(rename_expr(inner, map))),
        ExprKind::Binary(op, l, r) => {
            ExprKind::Binary(*op, Box::new(rename_expr(l, map)), Box::new(rename_expr(r, map)))
        }
        ExprKind::Call(f, args) => ExprKind::Call(f.clone(), args.iter().map(|a| rename_expr(a, map)).collect()),
        other => other.clone(),
    };
    Expr { kind, span: e.span }
}

fn rename_stmt(s: &Stmt, map: &BTreeMap<VarName, VarName>) -> Stmt {
    let names = |ns: &[VarName]| ns.iter().map(|n| rename_name(n, map)).collect();
    let exprs = |es: &[Expr]| es.iter().map(|e| rename_expr(e, map)).collect();
    let kind = match &s.kind {
        StmtKind::Skip => StmtKind::Skip,
        StmtKind::Assign { targets, values } => StmtKind::Assign { targets: names(targets), values: exprs(values) },
        StmtKind::Seq(ss) => StmtKind::Seq(ss.iter().map(|s| rename_stmt(s, map)).collect()),
        StmtKind::Choose(ss) => StmtKind::Choose(ss.iter().map(|s| rename_stmt(s, map)).collect()),
        StmtKind::If(arms) => StmtKind::If(arms.iter().map(|(g, b)| (rename_expr(g, map), rename_stmt(b, map))).collect()),
        StmtKind::While { guard, body } => {
            StmtKind::While { guard: rename_expr(guard, map), body: Box::new(rename_stmt(body, map)) }
        }
        StmtKind::Var { decl, init, body } => StmtKind::Var {
            decl: VarDecl { name: rename_name(&decl.name, map), ..decl.clone() },
            init: rename_expr(init, map),
            body: Box::new(rename_stmt(body, map)),
        },
        StmtKind::Call { outputs, sub, inputs } => {
            StmtKind::Call { outputs: names(outputs), sub: sub.clone(), inputs: exprs(inputs) }
        }
    };
    Stmt { kind, span: s.span }
}

/// Whether every path through `s` writes `r` before reading it, and writes it
/// at least once. Conservative: `false` when unsure.
fn written_before_read(s: &Stmt, r: &VarName) -> bool {
    matches!(assigned_after(s, r, false), Some(true))
}

/// `None` if `r` may be read while unassigned; otherwise whether it is surely
/// assigned afterwards.
fn assigned_after(s: &Stmt, r: &VarName, assigned: bool) -> Option<bool> {
    let reads = |e: &Expr| !assigned && e.mentions(r);
    match &s.kind {
        StmtKind::Skip => Some(assigned),
        StmtKind::Assign { targets, values } => {
            if values.iter().any(reads) {
                return None;
            }
            Some(assigned || targets.contains(r))
        }
        StmtKind::Call { outputs, inputs, .. } => {
            if inputs.iter().any(reads) {
                return None;
            }
            Some(assigned || outputs.contains(r))
        }
        StmtKind::Seq(ss) => ss.iter().try_fold(assigned, |a, s| assigned_after(s, r, a)),
        StmtKind::Choose(ss) => {
            ss.iter().map(|s| assigned_after(s, r, assigned)).try_fold(true, |acc, a| Some(acc && a?))
        }
        StmtKind::If(arms) => {
            if arms.iter().any(|(g, _)| reads(g)) {
                return None;
            }
            arms.iter().map(|(_, s)| assigned_after(s, r, assigned)).try_fold(true, |acc, a| Some(acc && a?))
        }
        StmtKind::While { guard, body } => {
            if reads(guard) {
                return None;
            }
            assigned_after(body, r, assigned)?;
            Some(assigned)
        }
        StmtKind::Var { init, body, .. } => {
            if reads(init) {
                return None;
            }
            assigned_after(body, r, assigned)
        }
    }
}
