//! Executions and extensional programs.
//!
//! A program maps every state of its base space to a nonempty set of
//! executions. An execution is a nonempty state sequence; infinite executions
//! are eventually periodic and stored as a lasso (a prefix followed by a cycle
//! repeated forever). Executions are kept in canonical form so that structural
//! equality coincides with equality of the denoted sequences.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state_space::{enumerate_states, project, SpaceError, State, StateSpace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("state {0} is not a state of the base space")]
    UnknownState(State),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("malformed relation: {0}")]
    Malformed(String),
}

/// Length of an execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Length {
    Finite(usize),
    Infinite,
}

/// A finite state sequence, or an infinite one given as `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "RawExecution")]
pub struct Execution {
    prefix: Vec<State>,
    cycle: Vec<State>,
}

#[derive(Deserialize)]
struct RawExecution {
    prefix: Vec<State>,
    #[serde(default)]
    cycle: Vec<State>,
}

impl From<RawExecution> for Execution {
    fn from(raw: RawExecution) -> Self {
        Execution::lasso(raw.prefix, raw.cycle)
    }
}

impl Execution {
    pub fn finite(states: Vec<State>) -> Self {
        Execution { prefix: states, cycle: Vec::new() }
    }

    /// `prefix · cycle^ω` in canonical form; an empty cycle gives a finite execution.
    pub fn lasso(prefix: Vec<State>, cycle: Vec<State>) -> Self {
        let mut e = Execution { prefix, cycle };
        e.canonicalize();
        e
    }

    pub fn single(state: State) -> Self {
        Self::finite(vec![state])
    }

    pub fn prefix(&self) -> &[State] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[State] {
        &self.cycle
    }

    pub fn is_finite(&self) -> bool {
        self.cycle.is_empty()
    }

    pub fn length(&self) -> Length {
        if self.is_finite() {
            Length::Finite(self.prefix.len())
        } else {
            Length::Infinite
        }
    }

    pub fn first(&self) -> Option<&State> {
        self.prefix.first()
    }

    /// Last state of a finite execution.
    pub fn last(&self) -> Option<&State> {
        if self.is_finite() {
            self.prefix.last()
        } else {
            None
        }
    }

    /// Every distinct position of the representation: prefix, then one copy of the cycle.
    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.prefix.iter().chain(self.cycle.iter())
    }

    /// Applies `f` to every state and re-canonicalizes.
    pub fn map_states(&self, mut f: impl FnMut(&State) -> State) -> Execution {
        Execution::lasso(self.prefix.iter().map(&mut f).collect(), self.cycle.iter().map(f).collect())
    }

    pub fn try_map_states<E>(&self, mut f: impl FnMut(&State) -> Result<State, E>) -> Result<Execution, E> {
        let prefix = self.prefix.iter().map(&mut f).collect::<Result<_, _>>()?;
        let cycle = self.cycle.iter().map(f).collect::<Result<_, _>>()?;
        Ok(Execution::lasso(prefix, cycle))
    }

    /// Pointwise projection; prefix and cycle are projected independently.
    pub fn project(&self, onto: &StateSpace) -> Result<Execution, SpaceError> {
        self.try_map_states(|s| project(s, onto))
    }

    fn canonicalize(&mut self) {
        if self.cycle.is_empty() {
            return;
        }
        let n = self.cycle.len();
        if let Some(p) = (1..n).find(|p| n.is_multiple_of(*p) && (*p..n).all(|i| self.cycle[i] == self.cycle[i - p])) {
            self.cycle.truncate(p);
        }
        if self.prefix.is_empty() {
            let head = self.cycle.remove(0);
            self.cycle.push(head.clone());
            self.prefix.push(head);
        }
        while self.prefix.len() > 1 && self.prefix.last() == self.cycle.last() {
            let last = self.prefix.pop().expect("nonempty prefix");
            self.cycle.pop();
            self.cycle.insert(0, last);
        }
    }
}

impl fmt::Display for Execution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        for (i, s) in self.prefix.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("⟩")?;
        if !self.cycle.is_empty() {
            f.write_str(" (cycle: ")?;
            for (i, s) in self.cycle.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{s}")?;
            }
            f.write_str(")*")?;
        }
        Ok(())
    }
}

/// A program given by its table of executions.
///
/// `unknown` lists start states whose executions were only partially explored
/// (an exploration budget ran out); their table entries hold whatever was found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ProgramJson", from = "ProgramJson")]
pub struct ExtensionalProgram {
    pub base: StateSpace,
    pub table: BTreeMap<State, BTreeSet<Execution>>,
    pub unknown: BTreeSet<State>,
}

#[derive(Serialize, Deserialize)]
struct ProgramJson {
    space: StateSpace,
    table: Vec<TableRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    unknown: Vec<State>,
}

#[derive(Serialize, Deserialize)]
struct TableRow {
    from: State,
    executions: Vec<Execution>,
}

impl From<ExtensionalProgram> for ProgramJson {
    fn from(p: ExtensionalProgram) -> Self {
        ProgramJson {
            space: p.base,
            table: p
                .table
                .into_iter()
                .map(|(from, execs)| TableRow { from, executions: execs.into_iter().collect() })
                .collect(),
            unknown: p.unknown.into_iter().collect(),
        }
    }
}

impl From<ProgramJson> for ExtensionalProgram {
    fn from(j: ProgramJson) -> Self {
        let mut table: BTreeMap<State, BTreeSet<Execution>> = BTreeMap::new();
        for row in j.table {
            table.entry(row.from).or_default().extend(row.executions);
        }
        ExtensionalProgram { base: j.space, table, unknown: j.unknown.into_iter().collect() }
    }
}

impl ExtensionalProgram {
    pub fn new(base: StateSpace, table: BTreeMap<State, BTreeSet<Execution>>) -> Self {
        ExtensionalProgram { base, table, unknown: BTreeSet::new() }
    }

    /// `a ↦ {⟨a⟩}` for every state of `base`.
    pub fn skip(base: StateSpace, budget: u64) -> Result<Self, SpaceError> {
        let table = enumerate_states(&base, budget)?
            .into_iter()
            .map(|a| (a.clone(), BTreeSet::from([Execution::single(a)])))
            .collect();
        Ok(Self::new(base, table))
    }

    pub fn executions_from(&self, a: &State) -> Result<&BTreeSet<Execution>, ProgramError> {
        if !self.base.contains(a) {
            return Err(ProgramError::UnknownState(a.clone()));
        }
        self.table.get(a).ok_or_else(|| ProgramError::UnknownState(a.clone()))
    }

    pub fn is_partial(&self) -> bool {
        !self.unknown.is_empty()
    }

    /// Names bound anywhere in an execution that are not base variables.
    pub fn auxiliary_names(&self) -> BTreeSet<crate::state_space::VarName> {
        self.table
            .values()
            .flatten()
            .flat_map(Execution::states)
            .flat_map(State::names)
            .filter(|n| !self.base.has(n))
            .cloned()
            .collect()
    }

    pub fn executions(&self) -> impl Iterator<Item = (&State, &Execution)> {
        self.table.iter().flat_map(|(a, es)| es.iter().map(move |e| (a, e)))
    }
}

/// One failed condition of the program definition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    /// A base state has no table entry.
    MissingStartState(State),
    /// A table key is not a state of the base space.
    ForeignStartState(State),
    /// A base state maps to an empty execution set.
    NoExecutions(State),
    /// A finite execution does not end in a state of the base space.
    FinalStateOutsideBase { from: State, last: State },
    /// An execution has no states.
    EmptyExecution(State),
    /// An execution does not start at its table key.
    WrongFirstState { from: State, first: State },
    /// A state of an execution lacks a base component.
    MissingBaseComponent { from: State, state: State },
}

impl Violation {
    /// Which numbered condition is violated: 1 (the domain is the whole base space),
    /// 2 (finite executions end in the base space) or 3 (executions are nonempty and
    /// start at their key). Missing base components are outside the three.
    pub fn condition(&self) -> Option<u8> {
        match self {
            Violation::MissingStartState(_) | Violation::ForeignStartState(_) | Violation::NoExecutions(_) => Some(1),
            Violation::FinalStateOutsideBase { .. } => Some(2),
            Violation::EmptyExecution(_) | Violation::WrongFirstState { .. } => Some(3),
            Violation::MissingBaseComponent { .. } => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingStartState(a) => write!(f, "condition 1: no executions listed for base state {a}"),
            Violation::ForeignStartState(a) => write!(f, "condition 1: {a} is not a base state"),
            Violation::NoExecutions(a) => write!(f, "condition 1: empty execution set at {a}"),
            Violation::FinalStateOutsideBase { from, last } => {
                write!(f, "condition 2: finite execution from {from} ends in {last}, outside the base space")
            }
            Violation::EmptyExecution(a) => write!(f, "condition 3: empty execution from {a}"),
            Violation::WrongFirstState { from, first } => {
                write!(f, "condition 3: execution listed under {from} starts at {first}")
            }
            Violation::MissingBaseComponent { from, state } => {
                write!(f, "execution from {from} passes through {state}, which lacks a base variable")
            }
        }
    }
}

/// Checks the three defining conditions of a program. An empty list means valid.
///
/// States listed as unknown are exempt from the totality checks, since their
/// executions were cut short by a budget.
pub fn validate_program(p: &ExtensionalProgram, budget: u64) -> Result<Vec<Violation>, SpaceError> {
    let mut out = Vec::new();
    for a in enumerate_states(&p.base, budget)? {
        if p.unknown.contains(&a) {
            continue;
        }
        match p.table.get(&a) {
            None => out.push(Violation::MissingStartState(a)),
            Some(es) if es.is_empty() => out.push(Violation::NoExecutions(a)),
            Some(_) => {}
        }
    }
    for (a, es) in &p.table {
        if !p.base.contains(a) {
            out.push(Violation::ForeignStartState(a.clone()));
        }
        for e in es {
            match e.first() {
                None => out.push(Violation::EmptyExecution(a.clone())),
                Some(first) if first != a => {
                    out.push(Violation::WrongFirstState { from: a.clone(), first: first.clone() })
                }
                Some(_) => {}
            }
            if let Some(last) = e.last() {
                if !p.base.contains(last) {
                    out.push(Violation::FinalStateOutsideBase { from: a.clone(), last: last.clone() });
                }
            }
            if let Some(bad) = e.states().find(|s| !p.base.is_covered_by(s)) {
                out.push(Violation::MissingBaseComponent { from: a.clone(), state: bad.clone() });
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// A finite binary relation over a space, given by its graph. The domain is the key set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "RelationJson", try_from = "RelationJson")]
pub struct EffectRelation {
    pub space: StateSpace,
    pub graph: BTreeMap<State, BTreeSet<State>>,
}

#[derive(Serialize, Deserialize)]
struct RelationJson {
    space: StateSpace,
    domain: Vec<State>,
    graph: Vec<GraphRow>,
}

#[derive(Serialize, Deserialize)]
struct GraphRow {
    from: State,
    to: Vec<State>,
}

impl From<EffectRelation> for RelationJson {
    fn from(r: EffectRelation) -> Self {
        RelationJson {
            space: r.space,
            domain: r.graph.keys().cloned().collect(),
            graph: r.graph.into_iter().map(|(from, to)| GraphRow { from, to: to.into_iter().collect() }).collect(),
        }
    }
}

impl TryFrom<RelationJson> for EffectRelation {
    type Error = ProgramError;
    fn try_from(j: RelationJson) -> Result<Self, Self::Error> {
        let graph: BTreeMap<State, BTreeSet<State>> =
            j.graph.into_iter().map(|row| (row.from, row.to.into_iter().collect())).collect();
        let domain: BTreeSet<State> = j.domain.into_iter().collect();
        if !domain.iter().eq(graph.keys()) {
            return Err(ProgramError::Malformed("domain differs from the graph's key set".into()));
        }
        EffectRelation::new(j.space, graph)
    }
}

impl EffectRelation {
    pub fn new(space: StateSpace, graph: BTreeMap<State, BTreeSet<State>>) -> Result<Self, ProgramError> {
        check_relation(&space, &graph)?;
        Ok(EffectRelation { space, graph })
    }

    pub fn domain(&self) -> impl Iterator<Item = &State> {
        self.graph.keys()
    }

    pub fn in_domain(&self, a: &State) -> bool {
        self.graph.contains_key(a)
    }

    pub fn image(&self, a: &State) -> Option<&BTreeSet<State>> {
        self.graph.get(a)
    }
}

/// A relation `F ⊆ A × A` describing what a program should achieve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub space: StateSpace,
    pub graph: BTreeMap<State, BTreeSet<State>>,
}

impl Problem {
    pub fn new(space: StateSpace, graph: BTreeMap<State, BTreeSet<State>>) -> Result<Self, ProgramError> {
        check_relation(&space, &graph)?;
        Ok(Problem { space, graph })
    }

    pub fn from_pairs(space: StateSpace, pairs: impl IntoIterator<Item = (State, State)>) -> Result<Self, ProgramError> {
        let mut graph: BTreeMap<State, BTreeSet<State>> = BTreeMap::new();
        for (a, b) in pairs {
            graph.entry(a).or_default().insert(b);
        }
        Self::new(space, graph)
    }

    pub fn domain(&self) -> impl Iterator<Item = &State> {
        self.graph.keys()
    }

    pub fn image(&self, a: &State) -> Option<&BTreeSet<State>> {
        self.graph.get(a)
    }
}

fn check_relation(space: &StateSpace, graph: &BTreeMap<State, BTreeSet<State>>) -> Result<(), ProgramError> {
    for (a, bs) in graph {
        if !space.contains(a) {
            return Err(ProgramError::UnknownState(a.clone()));
        }
        if bs.is_empty() {
            return Err(ProgramError::Malformed(format!("empty image at {a}")));
        }
        if let Some(b) = bs.iter().find(|b| !space.contains(b)) {
            return Err(ProgramError::UnknownState(b.clone()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_space::{Domain, Value, VarName, DEFAULT_ENUMERATION_BUDGET};

    fn v(n: &str) -> VarName {
        VarName::new(n).unwrap()
    }

    fn x(i: i64) -> State {
        State::new().with(v("x"), Value::Int(i))
    }

    fn xk(i: i64, k: i64) -> State {
        x(i).with(v("k"), Value::Int(k))
    }

    fn space01() -> StateSpace {
        StateSpace::new([(v("x"), Domain::int(0, 1).unwrap())])
    }

    #[test]
    fn lengths() {
        let a = Execution::single(x(0));
        assert!(a.is_finite());
        assert_eq!(a.length(), Length::Finite(1));
        let l = Execution::lasso(vec![x(0)], vec![x(0)]);
        assert!(!l.is_finite());
        assert_eq!(l.length(), Length::Infinite);
        assert_eq!(Execution::finite(vec![x(0), x(1), x(0)]).length(), Length::Finite(3));
    }

    #[test]
    fn canonical_lassos() {
        // a (b a)^ω == (a b)^ω == a b (a b)^ω
        let one = Execution::lasso(vec![x(0)], vec![x(1), x(0)]);
        let two = Execution::lasso(vec![x(0), x(1)], vec![x(0), x(1)]);
        let three = Execution::lasso(vec![x(0), x(1), x(0)], vec![x(1), x(0), x(1), x(0)]);
        assert_eq!(one, two);
        assert_eq!(one, three);
        assert_eq!(one.prefix(), &[x(0)]);
        assert_eq!(one.cycle(), &[x(1), x(0)]);
        // stutter
        let s = Execution::lasso(vec![x(0), x(0), x(0)], vec![x(0), x(0)]);
        assert_eq!(s, Execution::lasso(vec![x(0)], vec![x(0)]));
        assert_ne!(s, Execution::lasso(vec![x(1)], vec![x(0)]));
        let empty_prefix = Execution::lasso(vec![], vec![x(1), x(0)]);
        assert_eq!(empty_prefix, Execution::lasso(vec![x(1)], vec![x(0), x(1)]));
    }

    #[test]
    fn lasso_projection_keeps_structure() {
        let e = Execution::lasso(vec![x(0)], vec![xk(0, 1)]);
        let p = e.project(&space01()).unwrap();
        assert_eq!(p, Execution::lasso(vec![x(0)], vec![x(0)]));
        assert!(!p.is_finite());
    }

    #[test]
    fn skip_is_valid() {
        let p = ExtensionalProgram::skip(space01(), DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert!(validate_program(&p, DEFAULT_ENUMERATION_BUDGET).unwrap().is_empty());
        assert_eq!(p.executions_from(&x(0)).unwrap(), &BTreeSet::from([Execution::single(x(0))]));
        assert!(matches!(p.executions_from(&x(5)), Err(ProgramError::UnknownState(_))));
    }

    #[test]
    fn violations_name_their_condition() {
        let budget = DEFAULT_ENUMERATION_BUDGET;
        let mut p = ExtensionalProgram::skip(space01(), budget).unwrap();
        p.table.remove(&x(1));
        let vs = validate_program(&p, budget).unwrap();
        assert_eq!(vs, vec![Violation::MissingStartState(x(1))]);
        assert_eq!(vs[0].condition(), Some(1));

        let mut p = ExtensionalProgram::skip(space01(), budget).unwrap();
        p.table.insert(x(0), BTreeSet::from([Execution::finite(vec![x(0), xk(0, 1)])]));
        let vs = validate_program(&p, budget).unwrap();
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].condition(), Some(2));

        let mut p = ExtensionalProgram::skip(space01(), budget).unwrap();
        p.table.insert(x(0), BTreeSet::from([Execution::finite(vec![x(1)])]));
        let vs = validate_program(&p, budget).unwrap();
        assert_eq!(vs[0].condition(), Some(3));

        let mut p = ExtensionalProgram::skip(space01(), budget).unwrap();
        p.table.insert(x(0), BTreeSet::from([Execution::finite(vec![])]));
        let vs = validate_program(&p, budget).unwrap();
        assert_eq!(vs, vec![Violation::EmptyExecution(x(0))]);

        let mut p = ExtensionalProgram::skip(space01(), budget).unwrap();
        p.table.insert(x(0), BTreeSet::new());
        assert_eq!(validate_program(&p, budget).unwrap(), vec![Violation::NoExecutions(x(0))]);
    }

    #[test]
    fn nondeterministic_and_looping_tables() {
        let mut p = ExtensionalProgram::skip(space01(), 16).unwrap();
        let two = BTreeSet::from([Execution::finite(vec![x(0), x(0)]), Execution::finite(vec![x(0), x(1)])]);
        p.table.insert(x(0), two.clone());
        assert_eq!(p.executions_from(&x(0)).unwrap(), &two);
        let loops = BTreeSet::from([Execution::lasso(vec![x(1)], vec![x(1)])]);
        p.table.insert(x(1), loops.clone());
        assert_eq!(p.executions_from(&x(1)).unwrap(), &loops);
        assert!(validate_program(&p, 16).unwrap().is_empty());
    }

    #[test]
    fn program_json_round_trip() {
        let mut p = ExtensionalProgram::skip(space01(), 16).unwrap();
        p.table.insert(x(1), BTreeSet::from([Execution::lasso(vec![x(1)], vec![xk(1, 0), x(1)])]));
        let text = serde_json::to_string(&p).unwrap();
        let back: ExtensionalProgram = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert!(text.contains(r#""cycle""#));
        assert!(!text.contains("unknown"));
    }

    #[test]
    fn relation_json_rejects_inconsistent_domain() {
        let r = EffectRelation::new(space01(), BTreeMap::from([(x(0), BTreeSet::from([x(1)]))])).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<EffectRelation>(&text).unwrap(), r);
        let bad = text.replace(r#""domain":[{"x":0}]"#, r#""domain":[]"#);
        assert!(serde_json::from_str::<EffectRelation>(&bad).is_err());
    }

    #[test]
    fn problems_check_membership() {
        assert!(Problem::from_pairs(space01(), [(x(0), x(3))]).is_err());
        let f = Problem::from_pairs(space01(), [(x(0), x(1)), (x(0), x(0))]).unwrap();
        assert_eq!(f.image(&x(0)).unwrap().len(), 2);
        assert_eq!(f.domain().count(), 1);
    }
}
