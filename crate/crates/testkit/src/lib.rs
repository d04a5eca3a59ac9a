//! Seeded random generators for spaces, extensional programs, problems and
//! command-language programs, shared by the test suites.

use std::collections::{BTreeMap, BTreeSet};

use absprog_core::analysis::effect;
use absprog_core::program::{Execution, ExtensionalProgram, Problem};
use absprog_core::state_space::{
    enumerate_states, Domain, RenamingMap, State, StateSpace, Value, VarName, DEFAULT_ENUMERATION_BUDGET,
};
use rand::seq::SliceRandom;
use rand::Rng;
pub use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn name(s: &str) -> VarName {
    VarName::new(s).expect("valid variable name")
}

/// Base variables are drawn from these names, auxiliaries from `AUX_NAMES`.
pub const BASE_NAMES: [&str; 4] = ["w", "x", "y", "z"];
pub const AUX_NAMES: [&str; 2] = ["k", "t"];

pub fn random_domain(rng: &mut impl Rng) -> Domain {
    match rng.gen_range(0..4) {
        0 => Domain::Bool,
        1 => Domain::enumeration(["red", "green", "blue"]).expect("valid labels"),
        _ => {
            let min = rng.gen_range(-1..=1);
            Domain::int(min, min + rng.gen_range(0..=2)).expect("min <= max")
        }
    }
}

/// A nonempty space with at most `max_states` states.
pub fn random_space(rng: &mut impl Rng, max_states: u128) -> StateSpace {
    let n = rng.gen_range(1..=BASE_NAMES.len());
    let mut names = BASE_NAMES.to_vec();
    names.shuffle(rng);
    let mut space = StateSpace::empty();
    for v in names.into_iter().take(n) {
        let d = random_domain(rng);
        let candidate = space.clone().with(name(v), d);
        if candidate.state_count() <= max_states {
            space = candidate;
        }
    }
    if space.is_empty() {
        space = space.with(name("x"), Domain::Bool);
    }
    space
}

pub fn states(space: &StateSpace) -> Vec<State> {
    enumerate_states(space, DEFAULT_ENUMERATION_BUDGET).expect("small space")
}

fn aux_domain(aux: &str) -> Domain {
    match aux {
        "k" => Domain::int(0, 2).expect("valid"),
        _ => Domain::Bool,
    }
}

/// A base state, sometimes carrying auxiliary bindings.
fn inner_state(rng: &mut impl Rng, all: &[State]) -> State {
    let mut s = all.choose(rng).expect("nonempty space").clone();
    for aux in AUX_NAMES {
        if rng.gen_bool(0.3) {
            let carrier = aux_domain(aux).carrier();
            s.set(name(aux), carrier.choose(rng).expect("nonempty").clone());
        }
    }
    s
}

fn random_execution(rng: &mut impl Rng, a: &State, all: &[State], lasso_prob: f64) -> Execution {
    let mut prefix = vec![a.clone()];
    for _ in 0..rng.gen_range(0..=2) {
        prefix.push(inner_state(rng, all));
    }
    if rng.gen_bool(lasso_prob) {
        let cycle = (0..rng.gen_range(1..=2)).map(|_| inner_state(rng, all)).collect();
        Execution::lasso(prefix, cycle)
    } else {
        if prefix.len() > 1 || rng.gen_bool(0.7) {
            prefix.push(all.choose(rng).expect("nonempty").clone());
        }
        Execution::finite(prefix)
    }
}

/// A valid program: every base state gets one to three executions.
pub fn random_program(rng: &mut impl Rng, space: &StateSpace) -> ExtensionalProgram {
    random_program_with(rng, space, 0.2)
}

pub fn random_program_with(rng: &mut impl Rng, space: &StateSpace, lasso_prob: f64) -> ExtensionalProgram {
    let all = states(space);
    let table = all
        .iter()
        .map(|a| {
            let n = rng.gen_range(1..=3);
            (a.clone(), (0..n).map(|_| random_execution(rng, a, &all, lasso_prob)).collect())
        })
        .collect();
    ExtensionalProgram::new(space.clone(), table)
}

/// Removes the row of one start state.
pub fn drop_start_state(rng: &mut impl Rng, p: &ExtensionalProgram) -> ExtensionalProgram {
    let mut q = p.clone();
    let keys: Vec<State> = q.table.keys().cloned().collect();
    q.table.remove(keys.choose(rng).expect("nonempty table"));
    q
}

/// Makes one finite execution end in a state that binds an auxiliary.
pub fn end_in_auxiliary_state(rng: &mut impl Rng, p: &ExtensionalProgram) -> ExtensionalProgram {
    let mut q = p.clone();
    let keys: Vec<State> = q.table.keys().cloned().collect();
    let a = keys.choose(rng).expect("nonempty table").clone();
    let es = q.table.get_mut(&a).expect("key");
    let victim = es.iter().next().expect("nonempty").clone();
    es.remove(&victim);
    let mut states: Vec<State> = victim.prefix().to_vec();
    let last = states.last().expect("nonempty").clone().with(name("k"), Value::Int(0));
    states.push(last);
    es.insert(Execution::finite(states));
    q
}

/// Replaces the first state of one execution.
pub fn change_first_state(rng: &mut impl Rng, p: &ExtensionalProgram) -> ExtensionalProgram {
    let mut q = p.clone();
    let all = states(&p.base);
    let keys: Vec<State> = q.table.keys().cloned().collect();
    let a = keys.choose(rng).expect("nonempty table").clone();
    let es = q.table.get_mut(&a).expect("key");
    let victim = es.iter().next().expect("nonempty").clone();
    es.remove(&victim);
    let other = all
        .iter()
        .find(|s| **s != a)
        .cloned()
        .unwrap_or_else(|| a.clone().with(name("t"), Value::Bool(true)));
    let mut prefix = victim.prefix().to_vec();
    prefix[0] = other;
    if victim.is_finite() && prefix.len() == 1 {
        // keep the execution ending in a base state
        prefix.push(a.clone());
    }
    es.insert(Execution::lasso(prefix, victim.cycle().to_vec()));
    q
}

/// A program with the same effect: extra inner states and extra executions
/// that end where existing ones end.
pub fn effect_preserving_variant(rng: &mut impl Rng, p: &ExtensionalProgram) -> ExtensionalProgram {
    let all = states(&p.base);
    let mut q = p.clone();
    for es in q.table.values_mut() {
        let mut out = BTreeSet::new();
        for e in es.iter() {
            let mut prefix = e.prefix().to_vec();
            if rng.gen_bool(0.5) {
                let extra = inner_state(rng, &all);
                if !e.is_finite() {
                    let at = rng.gen_range(1..=prefix.len());
                    prefix.insert(at, extra);
                } else if prefix.len() == 1 {
                    prefix.extend([extra, prefix[0].clone()]);
                } else {
                    let at = rng.gen_range(1..prefix.len());
                    prefix.insert(at, extra);
                }
            }
            if e.is_finite() && rng.gen_bool(0.3) {
                let mut stutter = prefix.clone();
                let last = stutter.last().expect("nonempty").clone();
                stutter.push(last);
                out.insert(Execution::finite(stutter));
            }
            out.insert(Execution::lasso(prefix, e.cycle().to_vec()));
        }
        *es = out;
    }
    q
}

/// Changes the final state of one finite execution, or makes one execution loop.
pub fn perturb(rng: &mut impl Rng, p: &ExtensionalProgram) -> ExtensionalProgram {
    let all = states(&p.base);
    let mut q = p.clone();
    let keys: Vec<State> = q.table.keys().cloned().collect();
    let a = keys.choose(rng).expect("nonempty").clone();
    let es = q.table.get_mut(&a).expect("key");
    let victim = es.iter().next().expect("nonempty").clone();
    let replacement = if victim.is_finite() && all.len() > 1 && rng.gen_bool(0.7) {
        let mut s = victim.prefix().to_vec();
        let last = s.last().expect("nonempty").clone();
        let other = all.iter().find(|b| **b != last).expect("two states").clone();
        if s.len() == 1 {
            s.push(other);
        } else {
            *s.last_mut().expect("nonempty") = other;
        }
        Execution::finite(s)
    } else {
        Execution::lasso(vec![a.clone()], vec![a.clone()])
    };
    es.insert(replacement);
    q
}

/// A random relation over `space`: each state is in the domain with
/// probability one half and gets a random nonempty image.
pub fn random_problem(rng: &mut impl Rng, space: &StateSpace) -> Problem {
    let all = states(space);
    let mut graph = BTreeMap::new();
    for a in &all {
        if rng.gen_bool(0.5) {
            let image: BTreeSet<State> = all.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            let image = if image.is_empty() { BTreeSet::from([all.choose(rng).expect("nonempty").clone()]) } else { image };
            graph.insert(a.clone(), image);
        }
    }
    Problem::new(space.clone(), graph).expect("valid relation")
}

/// A problem `p` tends to solve: its effect with some states dropped and some
/// extra results allowed.
pub fn problem_near(rng: &mut impl Rng, p: &ExtensionalProgram) -> Problem {
    let all = states(&p.base);
    let eff = effect(p).relation;
    let mut graph = BTreeMap::new();
    for (a, bs) in &eff.graph {
        if rng.gen_bool(0.8) {
            let mut image = bs.clone();
            if rng.gen_bool(0.3) {
                image.insert(all.choose(rng).expect("nonempty").clone());
            }
            graph.insert(a.clone(), image);
        }
    }
    Problem::new(p.base.clone(), graph).expect("valid relation")
}

/// A renaming of every base variable onto fresh names `u_*`.
pub fn random_base_renaming(rng: &mut impl Rng, space: &StateSpace) -> RenamingMap {
    let mut targets: Vec<VarName> = ["u", "v", "k", "p", "q"].iter().map(|s| name(s)).collect();
    targets.shuffle(rng);
    RenamingMap::new(space.names().cloned().zip(targets)).expect("distinct targets")
}

/// Program text with one to three non-recursive subprograms. Every space has
/// at most 64 states. Subprogram `f{i}` only calls `f{j}` with `j < i`.
pub fn random_program_text(rng: &mut impl Rng) -> String {
    let mut g = TextGen { locals: 0, calls_left: 0, chooses_left: 0 };
    let space = [("x", Ty::Int), ("y", Ty::Int), ("b", Ty::Bool)];
    let space: Vec<(String, Ty)> = space
        .iter()
        .take(rng.gen_range(2..=3))
        .map(|(n, t)| (n.to_string(), *t))
        .collect();
    let mut out = format!(
        "space {}\n",
        space.iter().map(|(n, t)| format!("{n}: {}", t.decl())).collect::<Vec<_>>().join(", ")
    );
    let mut subs: Vec<Sig> = Vec::new();
    for i in 0..rng.gen_range(1..=3) {
        let outs: Vec<(String, Ty)> = (0..rng.gen_range(1..=2)).map(|j| (format!("r{j}"), Ty::random(rng))).collect();
        let ins: Vec<(String, Ty)> = (0..rng.gen_range(0..=2)).map(|j| (format!("p{j}"), Ty::random(rng))).collect();
        let scope: Vec<(String, Ty)> = outs.iter().chain(&ins).cloned().collect();
        g.reset(1, 1);
        // Most bodies write their outputs first; the rest read them undefined.
        let mut body = String::new();
        for (o, t) in &outs {
            if rng.gen_bool(0.75) {
                body.push_str(&format!("{o} := {}; ", g.expr(rng, &ins, &[], *t, 1)));
            }
        }
        body.push_str(&g.stmts(rng, &scope, &subs, 2));
        let decl = |v: &[(String, Ty)]| v.iter().map(|(n, t)| format!("{n}: {}", t.decl())).collect::<Vec<_>>().join(", ");
        out.push_str(&format!("sub ({}) := f{i}({})\n  {body}\nend\n", decl(&outs), decl(&ins)));
        subs.push(Sig { name: format!("f{i}"), outs: outs.iter().map(|o| o.1).collect(), ins: ins.iter().map(|p| p.1).collect() });
    }
    // The main body calls the last subprogram at least once.
    let last = subs.last().expect("one sub").clone();
    g.reset(1, 1);
    let call = g.call(rng, &space, &last).unwrap_or_else(|| "skip".into());
    let body = g.stmts(rng, &space, &subs, 2);
    out.push_str(&format!("begin\n  {call};\n  {body}\nend\n"));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
}

impl Ty {
    fn random(rng: &mut impl Rng) -> Ty {
        if rng.gen_bool(0.7) {
            Ty::Int
        } else {
            Ty::Bool
        }
    }

    fn decl(self) -> &'static str {
        match self {
            Ty::Int => "int[0..3]",
            Ty::Bool => "bool",
        }
    }
}

#[derive(Debug, Clone)]
struct Sig {
    name: String,
    outs: Vec<Ty>,
    ins: Vec<Ty>,
}

/// Calls and `choose` statements multiply the number of executions, so each
/// body gets a small allowance of both.
struct TextGen {
    locals: usize,
    calls_left: u32,
    chooses_left: u32,
}

impl TextGen {
    fn reset(&mut self, calls: u32, chooses: u32) {
        self.calls_left = calls;
        self.chooses_left = chooses;
    }

    fn vars(scope: &[(String, Ty)], ty: Ty) -> Vec<&String> {
        scope.iter().filter(|(_, t)| *t == ty).map(|(n, _)| n).collect()
    }

    fn expr(&mut self, rng: &mut impl Rng, scope: &[(String, Ty)], subs: &[Sig], ty: Ty, depth: u32) -> String {
        let vars = Self::vars(scope, ty);
        let callable: Vec<&Sig> = subs.iter().filter(|s| s.outs == [ty]).collect();
        if depth > 0 && self.calls_left > 0 && !callable.is_empty() && rng.gen_bool(0.15) {
            self.calls_left -= 1;
            let s = callable.choose(rng).expect("nonempty");
            let args: Vec<String> = s.ins.iter().map(|t| self.expr(rng, scope, &[], *t, 0)).collect();
            return format!("{}({})", s.name, args.join(", "));
        }
        if depth == 0 || rng.gen_bool(0.4) {
            return match (ty, vars.choose(rng)) {
                (_, Some(v)) if rng.gen_bool(0.7) => v.to_string(),
                (Ty::Int, _) => rng.gen_range(0..=3).to_string(),
                (Ty::Bool, _) => rng.gen_bool(0.5).to_string(),
            };
        }
        match ty {
            Ty::Int => {
                let op = ["+", "-", "*", "div", "mod"].choose(rng).expect("nonempty");
                let l = self.expr(rng, scope, subs, Ty::Int, depth - 1);
                let r = if matches!(*op, "div" | "mod") {
                    rng.gen_range(1..=2).to_string()
                } else {
                    self.expr(rng, scope, subs, Ty::Int, depth - 1)
                };
                format!("({l} {op} {r})")
            }
            Ty::Bool => match rng.gen_range(0..3) {
                0 => {
                    let op = ["=", "/=", "<", "<=", ">", ">="].choose(rng).expect("nonempty");
                    let l = self.expr(rng, scope, subs, Ty::Int, depth - 1);
                    let r = self.expr(rng, scope, subs, Ty::Int, depth - 1);
                    format!("({l} {op} {r})")
                }
                1 => format!("not {}", self.expr(rng, scope, subs, Ty::Bool, depth - 1)),
                _ => {
                    let op = ["and", "or"].choose(rng).expect("nonempty");
                    let l = self.expr(rng, scope, subs, Ty::Bool, depth - 1);
                    let r = self.expr(rng, scope, subs, Ty::Bool, depth - 1);
                    format!("({l} {op} {r})")
                }
            },
        }
    }

    fn call(&mut self, rng: &mut impl Rng, scope: &[(String, Ty)], s: &Sig) -> Option<String> {
        let mut outs = Vec::new();
        for t in &s.outs {
            let candidates: Vec<&String> =
                Self::vars(scope, *t).into_iter().filter(|v| !outs.contains(*v)).collect();
            outs.push((*candidates.choose(rng)?).clone());
        }
        let args: Vec<String> = s.ins.iter().map(|t| self.expr(rng, scope, &[], *t, 1)).collect();
        Some(format!("({}) := {}({})", outs.join(", "), s.name, args.join(", ")))
    }

    fn stmts(&mut self, rng: &mut impl Rng, scope: &[(String, Ty)], subs: &[Sig], depth: u32) -> String {
        let n = rng.gen_range(1..=2);
        (0..n).map(|_| self.stmt(rng, scope, subs, depth)).collect::<Vec<_>>().join("; ")
    }

    fn stmt(&mut self, rng: &mut impl Rng, scope: &[(String, Ty)], subs: &[Sig], depth: u32) -> String {
        let pick = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..9) };
        match pick {
            0 => "skip".into(),
            1 | 2 => {
                let (v, t) = scope.choose(rng).expect("nonempty scope").clone();
                format!("{v} := {}", self.expr(rng, scope, subs, t, 2))
            }
            3 => {
                let arms: Vec<String> = (0..rng.gen_range(1..=2))
                    .map(|_| {
                        let g = self.expr(rng, scope, &[], Ty::Bool, 1);
                        format!("{g} -> {}", self.stmts(rng, scope, subs, depth - 1))
                    })
                    .collect();
                format!("if {} fi", arms.join(" [] "))
            }
            4 if self.chooses_left > 0 => {
                self.chooses_left -= 1;
                let a = self.stmts(rng, scope, subs, depth - 1);
                let b = self.stmts(rng, scope, subs, depth - 1);
                format!("choose {a} [] {b} endchoose")
            }
            5 => {
                // A counting loop; out-of-range increments diverge.
                match Self::vars(scope, Ty::Int).choose(rng) {
                    Some(v) => {
                        let v = v.to_string();
                        let bound = rng.gen_range(1..=3);
                        format!("while {v} < {bound} do {v} := {v} + 1 od")
                    }
                    None => "skip".into(),
                }
            }
            6 => {
                self.locals += 1;
                let l = format!("l{}", self.locals);
                let t = Ty::random(rng);
                let init = self.expr(rng, scope, subs, t, 1);
                let mut inner = scope.to_vec();
                inner.push((l.clone(), t));
                format!("var {l}: {} := {init} in {} end", t.decl(), self.stmts(rng, &inner, subs, depth - 1))
            }
            7 | 8 if self.calls_left > 0 => match subs.choose(rng) {
                Some(s) => {
                    self.calls_left -= 1;
                    self.call(rng, scope, s).unwrap_or_else(|| "skip".into())
                }
                None => "skip".into(),
            },
            _ => "skip".into(),
        }
    }
}
