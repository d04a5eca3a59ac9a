//! Finite direct-product state spaces.
//!
//! A [`StateSpace`] maps variable names to finite [`Domain`]s. A [`State`] is a
//! total binding of the space's variables to values from their carriers. The
//! same binding-map type also represents states of superspaces (states that
//! bind auxiliary variables on top of the base ones); whether a binding map is
//! a state *of* a given space is checked with [`StateSpace::contains`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default upper bound on the number of states [`enumerate_states`] will produce.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("invalid variable name `{0}`")]
    InvalidName(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("state space has {count} states, exceeding the enumeration budget of {budget}")]
    BudgetExceeded { count: u128, budget: u64 },
    #[error("state does not bind `{var}` to a value of {domain}")]
    NotASuperstate { var: VarName, domain: Domain },
    #[error("renaming is not injective: `{0}` is the image of two names")]
    NotInjective(VarName),
}

/// A variable name: letters, digits and underscores, starting with a letter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct VarName(String);

impl VarName {
    pub fn new(name: impl Into<String>) -> Result<Self, SpaceError> {
        let name = name.into();
        if Self::is_valid(&name) {
            Ok(VarName(name))
        } else {
            Err(SpaceError::InvalidName(name))
        }
    }

    pub fn is_valid(name: &str) -> bool {
        let mut chars = name.chars();
        matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `self` if `taken` rejects nothing, else `self_n` for the smallest `n >= 1`
    /// that `taken` does not reject.
    pub fn fresh(&self, taken: impl Fn(&VarName) -> bool) -> VarName {
        if !taken(self) {
            return self.clone();
        }
        Self::fresh_suffixed(self, taken)
    }

    /// `self_n` for the smallest `n >= 1` not rejected by `taken`.
    pub fn fresh_suffixed(&self, taken: impl Fn(&VarName) -> bool) -> VarName {
        (1u64..)
            .map(|n| VarName(format!("{}_{}", self.0, n)))
            .find(|candidate| !taken(candidate))
            .expect("unbounded suffix search")
    }
}

impl TryFrom<String> for VarName {
    type Error = SpaceError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        VarName::new(value)
    }
}

impl From<VarName> for String {
    fn from(value: VarName) -> Self {
        value.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for VarName {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// A value bound to a variable.
///
/// `Undefined` is never in any carrier. It marks an output parameter that was
/// created by a call but has not been written or read yet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Label(String),
    Undefined,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Label(l) => f.write_str(l),
            Value::Undefined => f.write_str("?"),
        }
    }
}

/// A finite value domain. Equality is structural: `bool` and `int[0..1]` differ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Domain {
    Bool,
    Int { min: i64, max: i64 },
    Enum { labels: Vec<String> },
}

impl Domain {
    pub fn int(min: i64, max: i64) -> Result<Self, SpaceError> {
        let d = Domain::Int { min, max };
        d.validate().map(|()| d)
    }

    pub fn enumeration<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, SpaceError> {
        let d = Domain::Enum { labels: labels.into_iter().map(Into::into).collect() };
        d.validate().map(|()| d)
    }

    pub fn validate(&self) -> Result<(), SpaceError> {
        match self {
            Domain::Bool => Ok(()),
            Domain::Int { min, max } if min > max => {
                Err(SpaceError::InvalidDomain(format!("int[{min}..{max}] is empty")))
            }
            Domain::Int { .. } => Ok(()),
            Domain::Enum { labels } => {
                if labels.is_empty() {
                    return Err(SpaceError::InvalidDomain("enum without labels".into()));
                }
                let mut seen = BTreeSet::new();
                for l in labels {
                    if !VarName::is_valid(l) {
                        return Err(SpaceError::InvalidDomain(format!("bad enum label `{l}`")));
                    }
                    if !seen.insert(l) {
                        return Err(SpaceError::InvalidDomain(format!("duplicate enum label `{l}`")));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn size(&self) -> u128 {
        match self {
            Domain::Bool => 2,
            Domain::Int { min, max } => (*max as i128 - *min as i128 + 1).max(0) as u128,
            Domain::Enum { labels } => labels.len() as u128,
        }
    }

    /// The carrier in domain order. Panics on absurdly large integer ranges;
    /// callers enumerate only after a budget check.
    pub fn carrier(&self) -> Vec<Value> {
        match self {
            Domain::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Domain::Int { min, max } => (*min..=*max).map(Value::Int).collect(),
            Domain::Enum { labels } => labels.iter().cloned().map(Value::Label).collect(),
        }
    }

    pub fn first(&self) -> Value {
        match self {
            Domain::Bool => Value::Bool(false),
            Domain::Int { min, .. } => Value::Int(*min),
            Domain::Enum { labels } => Value::Label(labels[0].clone()),
        }
    }

    pub fn contains(&self, value: &Value) -> bool {
        match (self, value) {
            (Domain::Bool, Value::Bool(_)) => true,
            (Domain::Int { min, max }, Value::Int(i)) => min <= i && i <= max,
            (Domain::Enum { labels }, Value::Label(l)) => labels.contains(l),
            _ => false,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Bool => f.write_str("bool"),
            Domain::Int { min, max } => write!(f, "int[{min}..{max}]"),
            Domain::Enum { labels } => write!(f, "enum{{{}}}", labels.join(", ")),
        }
    }
}

/// A direct product of finite domains, indexed by variable name.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct StateSpace {
    vars: BTreeMap<VarName, Domain>,
}

#[derive(Deserialize)]
struct RawSpace {
    vars: BTreeMap<VarName, Domain>,
}

impl TryFrom<RawSpace> for StateSpace {
    type Error = SpaceError;
    fn try_from(raw: RawSpace) -> Result<Self, Self::Error> {
        let space = StateSpace { vars: raw.vars };
        space.validate().map(|()| space)
    }
}

impl StateSpace {
    pub fn new(vars: impl IntoIterator<Item = (VarName, Domain)>) -> Self {
        StateSpace { vars: vars.into_iter().collect() }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn vars(&self) -> &BTreeMap<VarName, Domain> {
        &self.vars
    }

    pub fn names(&self) -> impl Iterator<Item = &VarName> {
        self.vars.keys()
    }

    pub fn domain(&self, name: &VarName) -> Option<&Domain> {
        self.vars.get(name)
    }

    pub fn has(&self, name: &VarName) -> bool {
        self.vars.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn with(mut self, name: VarName, domain: Domain) -> Self {
        self.vars.insert(name, domain);
        self
    }

    /// Number of states; zero for the empty index set.
    pub fn state_count(&self) -> u128 {
        if self.vars.is_empty() {
            return 0;
        }
        self.vars.values().fold(1u128, |acc, d| acc.saturating_mul(d.size()))
    }

    /// True iff `state` binds exactly this space's variables, each in its carrier.
    pub fn contains(&self, state: &State) -> bool {
        state.len() == self.vars.len()
            && self.vars.iter().all(|(n, d)| state.get(n).is_some_and(|v| d.contains(v)))
    }

    /// True iff `state` binds every variable of this space to a value of its carrier
    /// (it may bind more).
    pub fn is_covered_by(&self, state: &State) -> bool {
        self.vars.iter().all(|(n, d)| state.get(n).is_some_and(|v| d.contains(v)))
    }

    pub fn validate(&self) -> Result<(), SpaceError> {
        self.vars.values().try_for_each(Domain::validate)
    }
}

impl fmt::Display for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, d) in &self.vars {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{n}: {d}")?;
        }
        Ok(())
    }
}

/// A binding of variable names to values; a state of some space, possibly
/// extended with auxiliary variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State {
    bindings: BTreeMap<VarName, Value>,
}

/// States of superspaces share the binding-map representation.
pub type ExtendedState = State;

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bindings(bindings: impl IntoIterator<Item = (VarName, Value)>) -> Self {
        State { bindings: bindings.into_iter().collect() }
    }

    pub fn bindings(&self) -> &BTreeMap<VarName, Value> {
        &self.bindings
    }

    pub fn get(&self, name: &VarName) -> Option<&Value> {
        self.bindings.get(name)
    }

    pub fn binds(&self, name: &VarName) -> bool {
        self.bindings.contains_key(name)
    }

    pub fn set(&mut self, name: VarName, value: Value) {
        self.bindings.insert(name, value);
    }

    pub fn remove(&mut self, name: &VarName) -> Option<Value> {
        self.bindings.remove(name)
    }

    pub fn with(mut self, name: VarName, value: Value) -> Self {
        self.set(name, value);
        self
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &VarName> {
        self.bindings.keys()
    }

    /// Pointwise renaming; names not in `map` are kept.
    pub fn rename(&self, map: &RenamingMap) -> State {
        State::from_bindings(self.bindings.iter().map(|(n, v)| (map.apply(n).clone(), v.clone())))
    }

    /// Restriction of the binding map to `names`, ignoring names it does not bind.
    pub fn restrict_to<'a>(&self, names: impl IntoIterator<Item = &'a VarName>) -> State {
        State::from_bindings(
            names.into_iter().filter_map(|n| self.bindings.get(n).map(|v| (n.clone(), v.clone()))),
        )
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (n, v) in &self.bindings {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{n}:{v}")?;
        }
        f.write_str("}")
    }
}

/// An injective map between variable names. Names outside the key set map to themselves.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<VarName, VarName>", into = "BTreeMap<VarName, VarName>")]
pub struct RenamingMap {
    pairs: BTreeMap<VarName, VarName>,
}

impl RenamingMap {
    pub fn new(pairs: impl IntoIterator<Item = (VarName, VarName)>) -> Result<Self, SpaceError> {
        let pairs: BTreeMap<_, _> = pairs.into_iter().collect();
        let mut seen = BTreeSet::new();
        for target in pairs.values() {
            if !seen.insert(target) {
                return Err(SpaceError::NotInjective(target.clone()));
            }
        }
        Ok(RenamingMap { pairs })
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn pairs(&self) -> &BTreeMap<VarName, VarName> {
        &self.pairs
    }

    pub fn apply<'a>(&'a self, name: &'a VarName) -> &'a VarName {
        self.pairs.get(name).unwrap_or(name)
    }

    pub fn sources(&self) -> impl Iterator<Item = &VarName> {
        self.pairs.keys()
    }

    pub fn targets(&self) -> impl Iterator<Item = &VarName> {
        self.pairs.values()
    }

    pub fn inverse(&self) -> RenamingMap {
        RenamingMap { pairs: self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl TryFrom<BTreeMap<VarName, VarName>> for RenamingMap {
    type Error = SpaceError;
    fn try_from(value: BTreeMap<VarName, VarName>) -> Result<Self, Self::Error> {
        RenamingMap::new(value)
    }
}

impl From<RenamingMap> for BTreeMap<VarName, VarName> {
    fn from(value: RenamingMap) -> Self {
        value.pairs
    }
}

/// Every state of `space`, variables in name order with the last name varying fastest,
/// values in domain order. The empty space has no states.
pub fn enumerate_states(space: &StateSpace, budget: u64) -> Result<Vec<State>, SpaceError> {
    let count = space.state_count();
    if count > budget as u128 {
        return Err(SpaceError::BudgetExceeded { count, budget });
    }
    if space.is_empty() {
        return Ok(Vec::new());
    }
    let columns: Vec<(&VarName, Vec<Value>)> =
        space.vars.iter().map(|(n, d)| (n, d.carrier())).collect();
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; columns.len()];
    loop {
        out.push(State::from_bindings(
            columns.iter().zip(&digits).map(|((n, c), &i)| ((*n).clone(), c[i].clone())),
        ));
        let mut pos = columns.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < columns[pos].1.len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// `sub <= sup`: every variable of `sub` is in `sup` with an equal domain.
pub fn is_subspace(sub: &StateSpace, sup: &StateSpace) -> bool {
    sub.vars.iter().all(|(n, d)| sup.vars.get(n) == Some(d))
}

/// A bijection `nu` from `a`'s names onto `b`'s names with `a[i] == b[nu(i)]`, if any.
/// Among all such bijections the one that is lexicographically smallest in
/// source-name order is returned.
pub fn spaces_equivalent(a: &StateSpace, b: &StateSpace) -> Option<RenamingMap> {
    if a.len() != b.len() {
        return None;
    }
    // Domain equality is an equivalence, so greedily taking the smallest free
    // target with an equal domain never blocks a completion.
    let mut used = BTreeSet::new();
    let mut pairs = BTreeMap::new();
    for (name, dom) in &a.vars {
        let target = b.vars.iter().find(|(t, d)| *d == dom && !used.contains(*t)).map(|(t, _)| t)?;
        used.insert(target.clone());
        pairs.insert(name.clone(), target.clone());
    }
    Some(RenamingMap { pairs })
}

/// Restriction of `state` to the variables of `onto`.
pub fn project(state: &State, onto: &StateSpace) -> Result<State, SpaceError> {
    for (n, d) in &onto.vars {
        match state.get(n) {
            Some(v) if d.contains(v) => {}
            _ => return Err(SpaceError::NotASuperstate { var: n.clone(), domain: d.clone() }),
        }
    }
    Ok(state.restrict_to(onto.names()))
}

/// Pointwise [`project`].
pub fn project_sequence(seq: &[State], onto: &StateSpace) -> Result<Vec<State>, SpaceError> {
    seq.iter().map(|s| project(s, onto)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> VarName {
        VarName::new(n).unwrap()
    }

    fn int(min: i64, max: i64) -> Domain {
        Domain::int(min, max).unwrap()
    }

    fn space(vars: &[(&str, Domain)]) -> StateSpace {
        StateSpace::new(vars.iter().map(|(n, d)| (v(n), d.clone())))
    }

    fn st(bs: &[(&str, i64)]) -> State {
        State::from_bindings(bs.iter().map(|(n, x)| (v(n), Value::Int(*x))))
    }

    #[test]
    fn names() {
        assert!(VarName::new("x_1").is_ok());
        assert!(VarName::new("1x").is_err());
        assert!(VarName::new("").is_err());
        assert!(VarName::new("_x").is_err());
        assert!(VarName::new("a-b").is_err());
    }

    #[test]
    fn fresh_names() {
        let taken: BTreeSet<VarName> = [v("k"), v("k_1")].into();
        assert_eq!(v("k").fresh(|n| taken.contains(n)), v("k_2"));
        assert_eq!(v("j").fresh(|n| taken.contains(n)), v("j"));
        assert_eq!(v("j").fresh_suffixed(|n| taken.contains(n)), v("j_1"));
    }

    #[test]
    fn domains() {
        assert!(Domain::int(3, 2).is_err());
        assert!(Domain::enumeration(["a", "a"]).is_err());
        assert!(Domain::enumeration(Vec::<String>::new()).is_err());
        let e = Domain::enumeration(["red", "green"]).unwrap();
        assert_eq!(e.carrier(), vec![Value::Label("red".into()), Value::Label("green".into())]);
        assert!(!Domain::Bool.contains(&Value::Int(0)));
        assert_ne!(Domain::Bool, int(0, 1));
    }

    #[test]
    fn enumerate_small_spaces() {
        let s = space(&[("x", int(0, 1)), ("y", int(0, 1))]);
        let states = enumerate_states(&s, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(states.len(), 4);
        assert_eq!(states[0], st(&[("x", 0), ("y", 0)]));
        assert_eq!(states[1], st(&[("x", 0), ("y", 1)]));
        assert!(enumerate_states(&StateSpace::empty(), 10).unwrap().is_empty());
        let b = space(&[("b", Domain::Bool)]);
        let states = enumerate_states(&b, 10).unwrap();
        assert_eq!(
            states,
            vec![
                State::new().with(v("b"), Value::Bool(false)),
                State::new().with(v("b"), Value::Bool(true))
            ]
        );
    }

    #[test]
    fn enumeration_budget() {
        let s = space(&[("x", int(0, 9)), ("y", int(0, 9))]);
        assert!(matches!(enumerate_states(&s, 99), Err(SpaceError::BudgetExceeded { count: 100, .. })));
        assert_eq!(enumerate_states(&s, 100).unwrap().len(), 100);
    }

    #[test]
    fn subspaces() {
        let a = space(&[("x", int(0, 3)), ("y", Domain::Bool)]);
        assert!(is_subspace(&space(&[("x", int(0, 3))]), &a));
        assert!(is_subspace(&a, &a));
        assert!(!is_subspace(&space(&[("x", int(0, 2))]), &space(&[("x", int(0, 3))])));
        assert!(is_subspace(&StateSpace::empty(), &a));
    }

    #[test]
    fn equivalence() {
        let nu = spaces_equivalent(&space(&[("x", Domain::Bool)]), &space(&[("y", Domain::Bool)])).unwrap();
        assert_eq!(nu.apply(&v("x")), &v("y"));
        assert!(spaces_equivalent(&space(&[("x", Domain::Bool)]), &space(&[("y", int(0, 1))])).is_none());
        let nu = spaces_equivalent(
            &space(&[("x", Domain::Bool), ("y", Domain::Bool)]),
            &space(&[("p", Domain::Bool), ("q", Domain::Bool)]),
        )
        .unwrap();
        assert_eq!(nu.apply(&v("x")), &v("p"));
        assert_eq!(nu.apply(&v("y")), &v("q"));
        // mixed domains force a non-greedy-looking pairing
        let nu = spaces_equivalent(
            &space(&[("a", int(0, 1)), ("b", Domain::Bool)]),
            &space(&[("p", Domain::Bool), ("q", int(0, 1))]),
        )
        .unwrap();
        assert_eq!(nu.apply(&v("a")), &v("q"));
        assert_eq!(nu.apply(&v("b")), &v("p"));
    }

    #[test]
    fn projection() {
        let onto = space(&[("x", int(0, 3))]);
        assert_eq!(project(&st(&[("x", 1), ("y", 2)]), &onto).unwrap(), st(&[("x", 1)]));
        assert_eq!(project(&st(&[("x", 1)]), &onto).unwrap(), st(&[("x", 1)]));
        assert!(matches!(project(&st(&[("y", 1)]), &onto), Err(SpaceError::NotASuperstate { .. })));
        assert!(project(&st(&[("x", 7)]), &onto).is_err());
        let ys = space(&[("y", int(0, 3))]);
        let seq = vec![st(&[("x", 0), ("y", 0)]), st(&[("x", 1), ("y", 3)])];
        assert_eq!(project_sequence(&seq, &ys).unwrap(), vec![st(&[("y", 0)]), st(&[("y", 3)])]);
        assert!(project_sequence(&[], &ys).unwrap().is_empty());
    }

    #[test]
    fn renaming_maps() {
        assert!(RenamingMap::new([(v("a"), v("c")), (v("b"), v("c"))]).is_err());
        let m = RenamingMap::new([(v("a"), v("b")), (v("b"), v("a"))]).unwrap();
        let s = st(&[("a", 1), ("b", 2)]);
        assert_eq!(s.rename(&m), st(&[("a", 2), ("b", 1)]));
        assert_eq!(s.rename(&m).rename(&m.inverse()), s);
    }

    #[test]
    fn json_formats() {
        let text = r#"{"vars": {"x": {"type": "int", "min": 0, "max": 3}, "b": {"type": "bool"}, "c": {"type": "enum", "labels": ["red","green"]}}}"#;
        let s: StateSpace = serde_json::from_str(text).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.domain(&v("c")), Some(&Domain::enumeration(["red", "green"]).unwrap()));
        let canon = serde_json::to_string(&s).unwrap();
        assert!(canon.starts_with(r#"{"vars":{"b":"#));
        let state: State = serde_json::from_str(r#"{"x": 1, "b": true, "c": "red", "r": null}"#).unwrap();
        assert_eq!(state.get(&v("r")), Some(&Value::Undefined));
        assert_eq!(state.get(&v("c")), Some(&Value::Label("red".into())));
        assert!(serde_json::from_str::<State>(r#"{"1x": 1}"#).is_err());
    }
}
