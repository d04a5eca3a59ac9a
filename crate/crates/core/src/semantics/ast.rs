use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};

use crate::state_space::{Domain, StateSpace, VarName};

/// Source position (1-based). Spans never take part in equality or hashing, so
/// ASTs compare structurally.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl Hash for Span {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub name: VarName,
    pub domain: Domain,
    pub span: Span,
}

impl VarDecl {
    pub fn new(name: VarName, domain: Domain) -> Self {
        VarDecl { name, domain, span: Span::default() }
    }
}

/// `sub (outs) := name(ins) body end`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubDecl {
    pub name: VarName,
    pub outs: Vec<VarDecl>,
    pub ins: Vec<VarDecl>,
    pub body: Stmt,
    pub span: Span,
}

impl SubDecl {
    /// The formal parameters; they form the subprogram's base space.
    pub fn formals(&self) -> impl Iterator<Item = &VarDecl> {
        self.outs.iter().chain(&self.ins)
    }

    pub fn base_space(&self) -> StateSpace {
        StateSpace::new(self.formals().map(|d| (d.name.clone(), d.domain.clone())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProgramAst {
    pub space: Vec<VarDecl>,
    pub subs: Vec<SubDecl>,
    pub body: Stmt,
}

impl ProgramAst {
    pub fn base_space(&self) -> StateSpace {
        StateSpace::new(self.space.iter().map(|d| (d.name.clone(), d.domain.clone())))
    }

    pub fn sub(&self, name: &VarName) -> Option<&SubDecl> {
        self.subs.iter().find(|s| &s.name == name)
    }

    /// Every identifier the program mentions or declares, enum labels included.
    pub fn names(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        for d in &self.space {
            collect_decl(d, &mut out);
        }
        for s in &self.subs {
            out.insert(s.name.clone());
            for d in s.formals() {
                collect_decl(d, &mut out);
            }
            s.body.collect_names(&mut out);
        }
        self.body.collect_names(&mut out);
        out
    }
}

fn collect_decl(d: &VarDecl, out: &mut BTreeSet<VarName>) {
    out.insert(d.name.clone());
    if let Domain::Enum { labels } = &d.domain {
        out.extend(labels.iter().filter_map(|l| VarName::new(l.clone()).ok()));
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    Skip,
    /// Simultaneous assignment: all right-hand sides are evaluated first.
    Assign { targets: Vec<VarName>, values: Vec<Expr> },
    Seq(Vec<Stmt>),
    If(Vec<(Expr, Stmt)>),
    While { guard: Expr, body: Box<Stmt> },
    Choose(Vec<Stmt>),
    Var { decl: VarDecl, init: Expr, body: Box<Stmt> },
    Call { outputs: Vec<VarName>, sub: VarName, inputs: Vec<Expr> },
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Stmt { kind, span: Span::default() }
    }

    pub fn skip() -> Self {
        Self::new(StmtKind::Skip)
    }

    pub fn assign(targets: Vec<VarName>, values: Vec<Expr>) -> Self {
        Self::new(StmtKind::Assign { targets, values })
    }

    /// A sequence, flattened; a single statement is returned as is.
    pub fn seq(stmts: Vec<Stmt>) -> Self {
        let mut flat = Vec::with_capacity(stmts.len());
        for s in stmts {
            match s.kind {
                StmtKind::Seq(inner) => flat.extend(inner),
                _ => flat.push(s),
            }
        }
        if flat.len() == 1 {
            flat.pop().expect("one statement")
        } else {
            Self::new(StmtKind::Seq(flat))
        }
    }

    pub fn var(decl: VarDecl, init: Expr, body: Stmt) -> Self {
        Self::new(StmtKind::Var { decl, init, body: Box::new(body) })
    }

    pub fn call(outputs: Vec<VarName>, sub: VarName, inputs: Vec<Expr>) -> Self {
        Self::new(StmtKind::Call { outputs, sub, inputs })
    }

    fn collect_names(&self, out: &mut BTreeSet<VarName>) {
        match &self.kind {
            StmtKind::Skip => {}
            StmtKind::Assign { targets, values } => {
                out.extend(targets.iter().cloned());
                values.iter().for_each(|e| e.collect_names(out));
            }
            StmtKind::Seq(ss) | StmtKind::Choose(ss) => ss.iter().for_each(|s| s.collect_names(out)),
            StmtKind::If(arms) => arms.iter().for_each(|(g, s)| {
                g.collect_names(out);
                s.collect_names(out);
            }),
            StmtKind::While { guard, body } => {
                guard.collect_names(out);
                body.collect_names(out);
            }
            StmtKind::Var { decl, init, body } => {
                collect_decl(decl, out);
                init.collect_names(out);
                body.collect_names(out);
            }
            StmtKind::Call { outputs, sub, inputs } => {
                out.extend(outputs.iter().cloned());
                out.insert(sub.clone());
                inputs.iter().for_each(|e| e.collect_names(out));
            }
        }
    }

    /// Whether any call statement or call expression occurs in the statement.
    pub fn has_calls(&self) -> bool {
        match &self.kind {
            StmtKind::Skip => false,
            StmtKind::Assign { values, .. } => values.iter().any(Expr::has_calls),
            StmtKind::Seq(ss) | StmtKind::Choose(ss) => ss.iter().any(Stmt::has_calls),
            StmtKind::If(arms) => arms.iter().any(|(g, s)| g.has_calls() || s.has_calls()),
            StmtKind::While { guard, body } => guard.has_calls() || body.has_calls(),
            StmtKind::Var { init, body, .. } => init.has_calls() || body.has_calls(),
            StmtKind::Call { .. } => true,
        }
    }

    /// Names of subprograms called, directly, from this statement.
    pub fn callees(&self, out: &mut BTreeSet<VarName>) {
        match &self.kind {
            StmtKind::Skip => {}
            StmtKind::Assign { values, .. } => values.iter().for_each(|e| e.callees(out)),
            StmtKind::Seq(ss) | StmtKind::Choose(ss) => ss.iter().for_each(|s| s.callees(out)),
            StmtKind::If(arms) => arms.iter().for_each(|(g, s)| {
                g.callees(out);
                s.callees(out);
            }),
            StmtKind::While { guard, body } => {
                guard.callees(out);
                body.callees(out);
            }
            StmtKind::Var { init, body, .. } => {
                init.callees(out);
                body.callees(out);
            }
            StmtKind::Call { sub, inputs, .. } => {
                out.insert(sub.clone());
                inputs.iter().for_each(|e| e.callees(out));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "div",
            BinOp::Mod => "mod",
            BinOp::Eq => "=",
            BinOp::Ne => "/=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Var(VarName),
    /// `x'`: the value of `x` in the post-state; only in problem postconditions.
    Post(VarName),
    Label(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(VarName, Vec<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr { kind, span: Span::default() }
    }

    pub fn int(i: i64) -> Self {
        Self::new(ExprKind::Int(i))
    }

    pub fn var(name: VarName) -> Self {
        Self::new(ExprKind::Var(name))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Self {
        Self::new(ExprKind::Binary(op, Box::new(l), Box::new(r)))
    }

    /// A literal denoting `value`, if it is a carrier value.
    pub fn literal(value: &crate::state_space::Value) -> Option<Self> {
        use crate::state_space::Value;
        Some(Self::new(match value {
            Value::Bool(b) => ExprKind::Bool(*b),
            Value::Int(i) => ExprKind::Int(*i),
            Value::Label(l) => ExprKind::Label(l.clone()),
            Value::Undefined => return None,
        }))
    }

    fn collect_names(&self, out: &mut BTreeSet<VarName>) {
        match &self.kind {
            ExprKind::Int(_) | ExprKind::Bool(_) => {}
            ExprKind::Var(n) | ExprKind::Post(n) => {
                out.insert(n.clone());
            }
            ExprKind::Label(l) => out.extend(VarName::new(l.clone()).ok()),
            ExprKind::Unary(_, e) => e.collect_names(out),
            ExprKind::Binary(_, l, r) => {
                l.collect_names(out);
                r.collect_names(out);
            }
            ExprKind::Call(f, args) => {
                out.insert(f.clone());
                args.iter().for_each(|a| a.collect_names(out));
            }
        }
    }

    pub fn has_calls(&self) -> bool {
        match &self.kind {
            ExprKind::Unary(_, e) => e.has_calls(),
            ExprKind::Binary(_, l, r) => l.has_calls() || r.has_calls(),
            ExprKind::Call(..) => true,
            _ => false,
        }
    }

    fn callees(&self, out: &mut BTreeSet<VarName>) {
        match &self.kind {
            ExprKind::Unary(_, e) => e.callees(out),
            ExprKind::Binary(_, l, r) => {
                l.callees(out);
                r.callees(out);
            }
            ExprKind::Call(f, args) => {
                out.insert(f.clone());
                args.iter().for_each(|a| a.callees(out));
            }
            _ => {}
        }
    }

    /// Whether the expression reads variable `name`.
    pub fn mentions(&self, name: &VarName) -> bool {
        match &self.kind {
            ExprKind::Var(n) => n == name,
            ExprKind::Unary(_, e) => e.mentions(name),
            ExprKind::Binary(_, l, r) => l.mentions(name) || r.mentions(name),
            ExprKind::Call(_, args) => args.iter().any(|a| a.mentions(name)),
            _ => false,
        }
    }
}
