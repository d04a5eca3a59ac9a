//! Nondeterministic small-step machine.
//!
//! A configuration is a stack of pending tasks, a store, the mapping from
//! source names in scope to store names, and the call frames. Steps that
//! change the store are visible and contribute a state to the execution;
//! control-only steps are silent.
//!
//! Output parameters start out undefined. The first read of an undefined
//! output (in an expression or at copy-out) branches over its whole domain.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use super::ast::*;
use super::check::ParseOptions;
use super::eval::{eval, EvalError};
use super::rewrite::desugar_call_expressions;
use super::SemanticsError;
use crate::program::{Execution, ExtensionalProgram};
use crate::state_space::{enumerate_states, Domain, State, StateSpace, Value, VarName};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Steps along one path, silent steps included.
    pub max_steps: usize,
    /// Nested call frames.
    pub max_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_steps: 100_000, max_depth: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RunOutcome {
    Terminated(Execution),
    ProvenDivergent(Execution),
    /// The path was cut off; the states recorded so far.
    BudgetExceeded(Vec<State>),
}

impl RunOutcome {
    pub fn execution(&self) -> Option<&Execution> {
        match self {
            RunOutcome::Terminated(e) | RunOutcome::ProvenDivergent(e) => Some(e),
            RunOutcome::BudgetExceeded(_) => None,
        }
    }
}

type NodeId = u32;
type DomId = u16;

#[derive(Debug)]
enum Node {
    Skip,
    Assign { targets: Vec<VarName>, values: Vec<Expr> },
    Seq(Vec<NodeId>),
    If(Vec<(Expr, NodeId)>),
    While { guard: Expr, body: NodeId },
    Choose(Vec<NodeId>),
    Var { name: VarName, dom: DomId, init: Expr, body: NodeId },
    Call { outputs: Vec<VarName>, sub: usize, inputs: Vec<Expr> },
}

#[derive(Debug)]
struct SubCode {
    outs: Vec<(VarName, DomId)>,
    ins: Vec<(VarName, DomId)>,
    body: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Slot {
    store: VarName,
    dom: DomId,
}

type Env = BTreeMap<VarName, Slot>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Task {
    Exec(NodeId),
    /// Leave the block that declared this source name.
    ExitVar(VarName),
    Return,
    Diverge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CopyOut {
    formal: Slot,
    target: Slot,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Frame {
    saved_env: Env,
    outputs: Vec<CopyOut>,
    formals: Vec<VarName>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    tasks: Vec<Task>,
    store: State,
    env: Env,
    frames: Vec<Frame>,
}

impl Configuration {
    pub fn store(&self) -> &State {
        &self.store
    }

    pub fn is_terminal(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn is_diverge(&self) -> bool {
        self.tasks == [Task::Diverge]
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    fn diverge(&self) -> Configuration {
        Configuration { tasks: vec![Task::Diverge], store: self.store.clone(), env: Env::new(), frames: Vec::new() }
    }

    fn read(&self, name: &VarName) -> Option<Value> {
        self.env.get(name).and_then(|s| self.store.get(&s.store).cloned())
    }

    fn eval(&self, e: &Expr) -> Result<Value, EvalError> {
        eval(e, &|n: &VarName, _post: bool| self.read(n))
    }
}

/// Result of one step.
#[derive(Debug)]
pub enum Step {
    Terminal,
    /// Successors, each flagged visible when it changed the store.
    Next(Vec<(Configuration, bool)>),
    DepthExceeded,
}

/// A program lowered for execution.
#[derive(Debug)]
pub struct Machine {
    base: StateSpace,
    nodes: Vec<Node>,
    subs: Vec<SubCode>,
    domains: Vec<Domain>,
    main: NodeId,
    base_env: Env,
    allow_globals: bool,
}

impl Machine {
    /// Lowers a checked program. Call expressions are desugared first.
    pub fn new(ast: &ProgramAst, opts: ParseOptions) -> Result<Machine, SemanticsError> {
        let ast = desugar_call_expressions(ast)?;
        let mut m = Machine {
            base: ast.base_space(),
            nodes: Vec::new(),
            subs: Vec::new(),
            domains: Vec::new(),
            main: 0,
            base_env: Env::new(),
            allow_globals: opts.allow_globals,
        };
        let index: BTreeMap<VarName, usize> = ast.subs.iter().enumerate().map(|(i, s)| (s.name.clone(), i)).collect();
        for d in &ast.space {
            let dom = m.intern(&d.domain);
            m.base_env.insert(d.name.clone(), Slot { store: d.name.clone(), dom });
        }
        for s in &ast.subs {
            let outs = s.outs.iter().map(|d| (d.name.clone(), m.intern(&d.domain))).collect();
            let ins = s.ins.iter().map(|d| (d.name.clone(), m.intern(&d.domain))).collect();
            let body = m.lower(&s.body, &index)?;
            m.subs.push(SubCode { outs, ins, body });
        }
        m.main = m.lower(&ast.body, &index)?;
        Ok(m)
    }

    pub fn base(&self) -> &StateSpace {
        &self.base
    }

    fn intern(&mut self, d: &Domain) -> DomId {
        match self.domains.iter().position(|e| e == d) {
            Some(i) => i as DomId,
            None => {
                self.domains.push(d.clone());
                (self.domains.len() - 1) as DomId
            }
        }
    }

    fn push(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        (self.nodes.len() - 1) as NodeId
    }

    fn lower(&mut self, s: &Stmt, index: &BTreeMap<VarName, usize>) -> Result<NodeId, SemanticsError> {
        let node = match &s.kind {
            StmtKind::Skip => Node::Skip,
            StmtKind::Assign { targets, values } => Node::Assign { targets: targets.clone(), values: values.clone() },
            StmtKind::Seq(ss) => Node::Seq(ss.iter().map(|s| self.lower(s, index)).collect::<Result<_, _>>()?),
            StmtKind::Choose(ss) => Node::Choose(ss.iter().map(|s| self.lower(s, index)).collect::<Result<_, _>>()?),
            StmtKind::If(arms) => Node::If(
                arms.iter()
                    .map(|(g, b)| Ok((g.clone(), self.lower(b, index)?)))
                    .collect::<Result<_, SemanticsError>>()?,
            ),
            StmtKind::While { guard, body } => Node::While { guard: guard.clone(), body: self.lower(body, index)? },
            StmtKind::Var { decl, init, body } => Node::Var {
                name: decl.name.clone(),
                dom: self.intern(&decl.domain),
                init: init.clone(),
                body: self.lower(body, index)?,
            },
            StmtKind::Call { outputs, sub, inputs } => Node::Call {
                outputs: outputs.clone(),
                sub: *index.get(sub).ok_or_else(|| SemanticsError::UnknownSubprogram(sub.clone()))?,
                inputs: inputs.clone(),
            },
        };
        Ok(self.push(node))
    }

    pub fn initial(&self, a: &State) -> Result<Configuration, SemanticsError> {
        if !self.base.contains(a) {
            return Err(SemanticsError::UnknownState(a.clone()));
        }
        Ok(Configuration { tasks: vec![Task::Exec(self.main)], store: a.clone(), env: self.base_env.clone(), frames: Vec::new() })
    }

    /// The immediate successors of `c`.
    pub fn step(&self, c: &Configuration, budget: &Budget) -> Step {
        let Some(task) = c.tasks.last() else {
            return Step::Terminal;
        };
        let mut rest = c.clone();
        rest.tasks.pop();
        let silent = |c: Configuration| Step::Next(vec![(c, false)]);
        let visible = |c: Configuration| Step::Next(vec![(c, true)]);
        match task {
            Task::Diverge => silent(c.clone()),
            Task::ExitVar(name) => {
                let slot = rest.env.remove(name).expect("block variable in scope");
                rest.store.remove(&slot.store);
                visible(rest)
            }
            Task::Return => self.ret(c, rest),
            Task::Exec(id) => match &self.nodes[*id as usize] {
                Node::Skip => silent(rest),
                Node::Seq(ids) => {
                    rest.tasks.extend(ids.iter().rev().map(|i| Task::Exec(*i)));
                    silent(rest)
                }
                Node::Choose(arms) => Step::Next(
                    arms.iter()
                        .map(|a| {
                            let mut n = rest.clone();
                            n.tasks.push(Task::Exec(*a));
                            (n, false)
                        })
                        .collect(),
                ),
                Node::Assign { targets, values } => {
                    let vals = match values.iter().map(|e| c.eval(e)).collect::<Result<Vec<_>, _>>() {
                        Ok(v) => v,
                        Err(e) => return self.eval_failure(c, e),
                    };
                    for (t, v) in targets.iter().zip(vals) {
                        let slot = &c.env[t];
                        if !self.domains[slot.dom as usize].contains(&v) {
                            return silent(c.diverge());
                        }
                        rest.store.set(slot.store.clone(), v);
                    }
                    visible(rest)
                }
                Node::If(arms) => {
                    let mut next = Vec::new();
                    for (g, body) in arms {
                        match c.eval(g) {
                            Ok(Value::Bool(true)) => {
                                let mut n = rest.clone();
                                n.tasks.push(Task::Exec(*body));
                                next.push((n, false));
                            }
                            Ok(Value::Bool(false)) => {}
                            Ok(_) => return silent(c.diverge()),
                            Err(e) => return self.eval_failure(c, e),
                        }
                    }
                    if next.is_empty() {
                        return silent(c.diverge());
                    }
                    Step::Next(next)
                }
                Node::While { guard, body } => match c.eval(guard) {
                    Ok(Value::Bool(true)) => {
                        rest.tasks.push(Task::Exec(*id));
                        rest.tasks.push(Task::Exec(*body));
                        silent(rest)
                    }
                    Ok(Value::Bool(false)) => silent(rest),
                    Ok(_) => silent(c.diverge()),
                    Err(e) => self.eval_failure(c, e),
                },
                Node::Var { name, dom, init, body } => {
                    let v = match c.eval(init) {
                        Ok(v) => v,
                        Err(e) => return self.eval_failure(c, e),
                    };
                    if !self.domains[*dom as usize].contains(&v) {
                        return silent(c.diverge());
                    }
                    let store_name = name.fresh(|n| rest.store.binds(n));
                    rest.store.set(store_name.clone(), v);
                    rest.env.insert(name.clone(), Slot { store: store_name, dom: *dom });
                    rest.tasks.push(Task::ExitVar(name.clone()));
                    rest.tasks.push(Task::Exec(*body));
                    visible(rest)
                }
                Node::Call { outputs, sub, inputs } => {
                    if c.frames.len() >= budget.max_depth {
                        return Step::DepthExceeded;
                    }
                    let code = &self.subs[*sub];
                    let args = match inputs.iter().map(|e| c.eval(e)).collect::<Result<Vec<_>, _>>() {
                        Ok(v) => v,
                        Err(e) => return self.eval_failure(c, e),
                    };
                    let mut env = if self.allow_globals { self.base_env.clone() } else { Env::new() };
                    let mut formals = Vec::new();
                    let mut bind = |rest: &mut Configuration, name: &VarName, dom: DomId, v: Value| {
                        let store_name = name.fresh(|n| rest.store.binds(n));
                        rest.store.set(store_name.clone(), v);
                        formals.push(store_name.clone());
                        let slot = Slot { store: store_name, dom };
                        env.insert(name.clone(), slot.clone());
                        slot
                    };
                    let mut copy = Vec::new();
                    for ((name, dom), target) in code.outs.iter().zip(outputs) {
                        let formal = bind(&mut rest, name, *dom, Value::Undefined);
                        copy.push(CopyOut { formal, target: c.env[target].clone() });
                    }
                    for ((name, dom), v) in code.ins.iter().zip(args) {
                        if !self.domains[*dom as usize].contains(&v) {
                            return silent(c.diverge());
                        }
                        bind(&mut rest, name, *dom, v);
                    }
                    let saved_env = std::mem::replace(&mut rest.env, env);
                    rest.frames.push(Frame { saved_env, outputs: copy, formals });
                    rest.tasks.push(Task::Return);
                    rest.tasks.push(Task::Exec(code.body));
                    visible(rest)
                }
            },
        }
    }

    fn ret(&self, c: &Configuration, mut rest: Configuration) -> Step {
        let frame = rest.frames.pop().expect("return inside a call");
        if let Some(out) = frame.outputs.iter().find(|o| c.store.get(&o.formal.store) == Some(&Value::Undefined)) {
            return self.resolve(c, &out.formal);
        }
        for out in &frame.outputs {
            let v = c.store.get(&out.formal.store).expect("formal bound").clone();
            if !self.domains[out.target.dom as usize].contains(&v) {
                return Step::Next(vec![(c.diverge(), false)]);
            }
            rest.store.set(out.target.store.clone(), v);
        }
        for f in &frame.formals {
            rest.store.remove(f);
        }
        rest.env = frame.saved_env;
        Step::Next(vec![(rest, true)])
    }

    /// One visible successor per value of the slot's domain, with the current task retried.
    fn resolve(&self, c: &Configuration, slot: &Slot) -> Step {
        Step::Next(
            self.domains[slot.dom as usize]
                .carrier()
                .into_iter()
                .map(|v| {
                    let mut n = c.clone();
                    n.store.set(slot.store.clone(), v);
                    (n, true)
                })
                .collect(),
        )
    }

    fn eval_failure(&self, c: &Configuration, e: EvalError) -> Step {
        match e {
            EvalError::Undefined(name) => self.resolve(c, &c.env[&name]),
            _ => Step::Next(vec![(c.diverge(), false)]),
        }
    }
}

/// All executions from `a`: an exhaustive depth-first search that closes a
/// lasso whenever a configuration repeats along the current path.
pub fn run_all(m: &Machine, a: &State, budget: &Budget) -> Result<BTreeSet<RunOutcome>, SemanticsError> {
    struct Open {
        config: Configuration,
        succs: Vec<(Configuration, bool)>,
        trace_len: usize,
    }
    let mut out = BTreeSet::new();
    let mut trace = vec![a.clone()];
    let mut on_path: HashMap<Configuration, usize> = HashMap::new();
    let mut stack: Vec<Open> = Vec::new();

    let mut visit = |config: Configuration,
                     trace: &[State],
                     stack: &mut Vec<Open>,
                     on_path: &mut HashMap<Configuration, usize>| {
        let len = trace.len();
        if let Some(&first) = on_path.get(&config) {
            let cycle = if first == len { vec![trace[len - 1].clone()] } else { trace[first..].to_vec() };
            out.insert(RunOutcome::ProvenDivergent(Execution::lasso(trace[..first].to_vec(), cycle)));
            return;
        }
        if stack.len() >= budget.max_steps {
            out.insert(RunOutcome::BudgetExceeded(trace.to_vec()));
            return;
        }
        match m.step(&config, budget) {
            Step::Terminal => {
                out.insert(RunOutcome::Terminated(Execution::finite(trace.to_vec())));
            }
            Step::DepthExceeded => {
                out.insert(RunOutcome::BudgetExceeded(trace.to_vec()));
            }
            Step::Next(mut succs) => {
                succs.reverse();
                on_path.insert(config.clone(), len);
                stack.push(Open { config, succs, trace_len: len });
            }
        }
    };

    visit(m.initial(a)?, &trace, &mut stack, &mut on_path);
    while let Some(top) = stack.last_mut() {
        match top.succs.pop() {
            Some((next, shows)) => {
                trace.truncate(top.trace_len);
                if shows {
                    trace.push(next.store.clone());
                }
                visit(next, &trace, &mut stack, &mut on_path);
            }
            None => {
                on_path.remove(&top.config);
                stack.pop();
            }
        }
    }
    Ok(out)
}

/// Runs the program from every base state. Start states with a cut-off path
/// are listed in `unknown` and keep only their complete executions.
pub fn to_extensional(m: &Machine, budget: &Budget, enumeration_budget: u64) -> Result<ExtensionalProgram, SemanticsError> {
    let starts = enumerate_states(m.base(), enumeration_budget)?;
    let rows = starts
        .par_iter()
        .map(|a| run_all(m, a, budget).map(|o| (a.clone(), o)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut p = ExtensionalProgram::new(m.base().clone(), BTreeMap::new());
    for (a, outcomes) in rows {
        let mut execs = BTreeSet::new();
        for o in outcomes {
            match o {
                RunOutcome::Terminated(e) | RunOutcome::ProvenDivergent(e) => {
                    execs.insert(e);
                }
                RunOutcome::BudgetExceeded(_) => {
                    p.unknown.insert(a.clone());
                }
            }
        }
        if !execs.is_empty() {
            p.table.insert(a, execs);
        }
    }
    Ok(p)
}
