//! Effects, solution checking and program equivalence.
//!
//! Budgets can leave a start state undecided, so every check returns a
//! three-valued [`Verdict`]: a definite failure wins over undecided states,
//! and `Holds` is only reported when every relevant state was decided.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::program::{EffectRelation, ExtensionalProgram, Problem, ProgramError};
use crate::semantics::eval::eval;
use crate::semantics::{parse_predicate, Diagnostic};
use crate::state_space::{enumerate_states, SpaceError, State, StateSpace, Value};
use crate::transforms::{apply_steps, TransformError, TransformStep};

pub const DEFAULT_COUNTEREXAMPLE_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("state spaces differ: {{{left}}} vs {{{right}}}; transform the program onto the problem's space first")]
    SpaceMismatch { left: StateSpace, right: StateSpace },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("invalid predicate `{text}`: {}", diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Predicate { text: String, diags: Vec<Diagnostic> },
}

/// The effect of a program plus the start states whose exploration was cut short.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Effect {
    pub relation: EffectRelation,
    pub unknown: BTreeSet<State>,
}

/// Domain: decided start states all of whose executions are finite.
/// Image: the last states of those executions.
pub fn effect(p: &ExtensionalProgram) -> Effect {
    let graph = p
        .table
        .iter()
        .filter(|(a, es)| !p.unknown.contains(*a) && !es.is_empty() && es.iter().all(|e| e.is_finite()))
        .map(|(a, es)| (a.clone(), es.iter().filter_map(|e| e.last().cloned()).collect()))
        .collect();
    Effect { relation: EffectRelation { space: p.base.clone(), graph }, unknown: p.unknown.clone() }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    /// Some execution from the state is infinite.
    Diverges,
    /// A possible final state outside what is allowed.
    Produces(State),
    /// The two effects disagree; `None` means outside the effect's domain.
    Differs { left: Option<BTreeSet<State>>, right: Option<BTreeSet<State>> },
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &Option<BTreeSet<State>>| match s {
            None => "no effect (may diverge)".to_string(),
            Some(bs) => format!("{{{}}}", bs.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", ")),
        };
        match self {
            Reason::Diverges => f.write_str("diverges"),
            Reason::Produces(b) => write!(f, "produces {b}"),
            Reason::Differs { left, right } => write!(f, "left {} vs right {}", side(left), side(right)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub state: State,
    pub reason: Reason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    /// At most `limit` counterexamples; `total` counts all of them.
    Fails { counterexamples: Vec<Counterexample>, total: usize },
    Unknown { states: Vec<State> },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails { .. })
    }

    fn collect(failures: Vec<Counterexample>, undecided: Vec<State>, limit: usize) -> Verdict {
        if !failures.is_empty() {
            let total = failures.len();
            Verdict::Fails { counterexamples: failures.into_iter().take(limit).collect(), total }
        } else if !undecided.is_empty() {
            Verdict::Unknown { states: undecided }
        } else {
            Verdict::Holds
        }
    }
}

/// What is known about the executions from one start state.
enum Outcomes<'a> {
    Decided(Option<&'a BTreeSet<State>>),
    /// Cut short; what the complete executions found so far show.
    Partial { diverges: bool, finals: BTreeSet<State> },
}

fn outcomes<'a>(p: &ExtensionalProgram, eff: &'a Effect, a: &State) -> Outcomes<'a> {
    if eff.unknown.contains(a) {
        let es = p.table.get(a).into_iter().flatten();
        let (inf, fin): (Vec<_>, Vec<_>) = es.partition(|e| !e.is_finite());
        Outcomes::Partial { diverges: !inf.is_empty(), finals: fin.iter().filter_map(|e| e.last().cloned()).collect() }
    } else {
        Outcomes::Decided(eff.relation.image(a))
    }
}

fn same_space(a: &StateSpace, b: &StateSpace) -> Result<(), AnalysisError> {
    if a == b {
        Ok(())
    } else {
        Err(AnalysisError::SpaceMismatch { left: a.clone(), right: b.clone() })
    }
}

/// Whether `p` solves `f`: every state of `f`'s domain is in the effect's
/// domain and every possible result is allowed by `f`.
pub fn solves(f: &Problem, p: &ExtensionalProgram, limit: usize) -> Result<Verdict, AnalysisError> {
    same_space(&f.space, &p.base)?;
    let eff = effect(p);
    let mut failures = Vec::new();
    let mut undecided = Vec::new();
    for (a, allowed) in &f.graph {
        let bad = |finals: &BTreeSet<State>| finals.iter().find(|b| !allowed.contains(*b)).cloned();
        let reason = match outcomes(p, &eff, a) {
            Outcomes::Decided(None) => Some(Reason::Diverges),
            Outcomes::Decided(Some(bs)) => bad(bs).map(Reason::Produces),
            Outcomes::Partial { diverges: true, .. } => Some(Reason::Diverges),
            Outcomes::Partial { finals, .. } => match bad(&finals) {
                Some(b) => Some(Reason::Produces(b)),
                None => {
                    undecided.push(a.clone());
                    None
                }
            },
        };
        if let Some(reason) = reason {
            failures.push(Counterexample { state: a.clone(), reason });
        }
    }
    Ok(Verdict::collect(failures, undecided, limit))
}

/// Whether two programs over the same base space have equal effects.
pub fn equivalent(p: &ExtensionalProgram, q: &ExtensionalProgram, limit: usize) -> Result<Verdict, AnalysisError> {
    same_space(&p.base, &q.base)?;
    let (ep, eq) = (effect(p), effect(q));
    let starts: BTreeSet<&State> =
        p.table.keys().chain(&p.unknown).chain(q.table.keys()).chain(&q.unknown).collect();
    let mut failures = Vec::new();
    let mut undecided = Vec::new();
    for a in starts {
        match (outcomes(p, &ep, a), outcomes(q, &eq, a)) {
            (Outcomes::Decided(l), Outcomes::Decided(r)) => {
                if l != r {
                    let reason = Reason::Differs { left: l.cloned(), right: r.cloned() };
                    failures.push(Counterexample { state: a.clone(), reason });
                }
            }
            (Outcomes::Decided(known), Outcomes::Partial { diverges, finals })
            | (Outcomes::Partial { diverges, finals }, Outcomes::Decided(known)) => {
                // A partial side definitely differs from a terminating one if it
                // can diverge or reach a final state the other cannot.
                let differs = known.is_some_and(|bs| diverges || !finals.is_subset(bs));
                if differs {
                    let left = ep.relation.image(a).cloned();
                    let right = eq.relation.image(a).cloned();
                    failures.push(Counterexample { state: a.clone(), reason: Reason::Differs { left, right } });
                } else {
                    undecided.push(a.clone());
                }
            }
            (Outcomes::Partial { .. }, Outcomes::Partial { .. }) => undecided.push(a.clone()),
        }
    }
    Ok(Verdict::collect(failures, undecided, limit))
}

/// Applies `steps` to `p`, then checks it against `f`. Also returns the
/// transformed base space.
pub fn solves_via_transform(
    f: &Problem,
    p: &ExtensionalProgram,
    steps: &[TransformStep],
    limit: usize,
) -> Result<(Verdict, StateSpace), AnalysisError> {
    let t = apply_steps(p, steps)?;
    let v = solves(f, &t, limit)?;
    Ok((v, t.base))
}

/// Problem file contents: an explicit pair list, or a pre/postcondition pair
/// where primed names in `post` stand for the final values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSpec {
    Pairs { space: StateSpace, pairs: Vec<(State, State)> },
    Predicates { space: StateSpace, pre: String, post: String },
}

impl ProblemSpec {
    pub fn space(&self) -> &StateSpace {
        match self {
            ProblemSpec::Pairs { space, .. } | ProblemSpec::Predicates { space, .. } => space,
        }
    }

    /// The problem as an explicit relation. Predicates are expanded over all
    /// pairs of states; its domain is the set of states with at least one
    /// allowed result, not the precondition by itself. A predicate that fails
    /// to evaluate (e.g. division by zero) counts as false.
    pub fn expand(&self, budget: u64) -> Result<Problem, AnalysisError> {
        match self {
            ProblemSpec::Pairs { space, pairs } => Ok(Problem::from_pairs(space.clone(), pairs.iter().cloned())?),
            ProblemSpec::Predicates { space, pre, post } => {
                let pre_e = parse_predicate(pre, space, false)
                    .map_err(|diags| AnalysisError::Predicate { text: pre.clone(), diags })?;
                let post_e = parse_predicate(post, space, true)
                    .map_err(|diags| AnalysisError::Predicate { text: post.clone(), diags })?;
                let states = enumerate_states(space, budget)?;
                let mut graph = BTreeMap::new();
                for a in &states {
                    let holds = |e, b: &State| {
                        let lookup = |n: &_, primed: bool| if primed { b.get(n) } else { a.get(n) }.cloned();
                        eval(e, &lookup) == Ok(Value::Bool(true))
                    };
                    if !holds(&pre_e, a) {
                        continue;
                    }
                    let image: BTreeSet<State> = states.iter().filter(|b| holds(&post_e, b)).cloned().collect();
                    if !image.is_empty() {
                        graph.insert(a.clone(), image);
                    }
                }
                Ok(Problem::new(space.clone(), graph)?)
            }
        }
    }
}
