//! Base-space transformations: renaming, extension and restriction.
//!
//! None of them changes what a program does; they only change which variables
//! form its interface. Two programs are identical when some sequence of these
//! transformations maps them onto the same program; [`check_identical`]
//! verifies a given witness sequence, it does not search for one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::program::{Execution, ExtensionalProgram};
use crate::state_space::{
    enumerate_states, is_subspace, Domain, RenamingMap, SpaceError, State, StateSpace, Value, VarName,
    DEFAULT_ENUMERATION_BUDGET,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("name collision on `{0}`")]
    NameCollision(VarName),
    #[error("auxiliary variable `{0}` has no entry in the auxiliary renaming")]
    IncompleteAuxiliaryMap(VarName),
    #[error("`{0}` is not a base variable")]
    NotABaseVariable(VarName),
    #[error("`{0}` is already a base variable")]
    VariableAlreadyInBase(VarName),
    #[error("auxiliary `{var}` takes value {value}, outside {domain}")]
    AuxiliaryDomainMismatch { var: VarName, value: Value, domain: Domain },
    #[error("{{{target}}} is not a subspace of the base space {{{base}}}")]
    NotASubspace { target: StateSpace, base: StateSpace },
    #[error("{}step {index} is inapplicable: {source}", side.map(|s| format!("{s} ")).unwrap_or_default())]
    InapplicableStep { side: Option<Side>, index: usize, source: Box<TransformError> },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// One base-space transformation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum TransformStep {
    /// Base names not mentioned in `base` keep their name. Auxiliary names not
    /// mentioned in `aux` keep theirs unless that would collide with a new base
    /// name, in which case they get a fresh `_n` suffix.
    Rename {
        base: RenamingMap,
        #[serde(default)]
        aux: RenamingMap,
    },
    Extend { var: VarName, domain: Domain },
    Restrict { space: StateSpace },
}

impl TransformStep {
    pub fn apply(&self, p: &ExtensionalProgram) -> Result<ExtensionalProgram, TransformError> {
        match self {
            TransformStep::Rename { base, aux } => {
                let nu = complete_base_renaming(&p.base, base)?;
                let mu = complete_aux_renaming(p, &nu, aux);
                rename(p, &nu, &mu)
            }
            TransformStep::Extend { var, domain } => extend(p, var, domain),
            TransformStep::Restrict { space } => restrict(p, space),
        }
    }
}

/// Two transformation sequences claimed to map two programs onto the same one.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityWitness {
    #[serde(default)]
    pub left: Vec<TransformStep>,
    #[serde(default)]
    pub right: Vec<TransformStep>,
}

fn complete_base_renaming(base: &StateSpace, partial: &RenamingMap) -> Result<RenamingMap, TransformError> {
    if let Some(n) = partial.sources().find(|n| !base.has(n)) {
        return Err(TransformError::NotABaseVariable(n.clone()));
    }
    RenamingMap::new(base.names().map(|n| (n.clone(), partial.apply(n).clone())))
        .map_err(|e| match e {
            SpaceError::NotInjective(n) => TransformError::NameCollision(n),
            other => other.into(),
        })
}

/// Extends `partial` to every auxiliary name of `p`, keeping names where possible
/// and renaming auxiliaries that clash with a target of `nu` to a fresh name.
pub fn complete_aux_renaming(p: &ExtensionalProgram, nu: &RenamingMap, partial: &RenamingMap) -> RenamingMap {
    let aux = p.auxiliary_names();
    let base_targets: BTreeSet<VarName> = p.base.names().map(|n| nu.apply(n).clone()).collect();
    let mut taken: BTreeSet<VarName> = base_targets.iter().chain(&aux).chain(partial.targets()).cloned().collect();
    let mut pairs = BTreeMap::new();
    for k in &aux {
        let target = match partial.pairs().get(k) {
            Some(t) => t.clone(),
            None if base_targets.contains(k) => {
                let fresh = k.fresh_suffixed(|n| taken.contains(n));
                taken.insert(fresh.clone());
                fresh
            }
            None => k.clone(),
        };
        pairs.insert(k.clone(), target);
    }
    RenamingMap::new(pairs).unwrap_or_else(|_| partial.clone())
}

/// Renames base variables by `nu` and auxiliary variables by `mu` in every state
/// of every execution.
///
/// Base variables missing from `nu` keep their names. Every auxiliary name must
/// have an entry in `mu` (identity entries are fine), and no two variables may
/// end up with the same name.
pub fn rename(p: &ExtensionalProgram, nu: &RenamingMap, mu: &RenamingMap) -> Result<ExtensionalProgram, TransformError> {
    let nu = complete_base_renaming(&p.base, nu)?;
    let aux = p.auxiliary_names();
    let mut combined: BTreeMap<VarName, VarName> = nu.pairs().clone();
    let mut targets: BTreeSet<VarName> = nu.targets().cloned().collect();
    for k in &aux {
        let target = mu.pairs().get(k).ok_or_else(|| TransformError::IncompleteAuxiliaryMap(k.clone()))?;
        if !targets.insert(target.clone()) {
            return Err(TransformError::NameCollision(target.clone()));
        }
        combined.insert(k.clone(), target.clone());
    }
    let map = RenamingMap::new(combined)?;
    let base = StateSpace::new(p.base.vars().iter().map(|(n, d)| (map.apply(n).clone(), d.clone())));
    let table = p
        .table
        .iter()
        .map(|(a, es)| (a.rename(&map), es.iter().map(|e| e.map_states(|s| s.rename(&map))).collect()))
        .collect();
    let unknown = p.unknown.iter().map(|a| a.rename(&map)).collect();
    Ok(ExtensionalProgram { base, table, unknown })
}

/// Adds `var: domain` to the base space.
///
/// Each new start state `c` runs the executions of its projection. A state that
/// already binds `var` (as an auxiliary) is kept as it is; any other state
/// carries `var` over from the state before it.
pub fn extend(p: &ExtensionalProgram, var: &VarName, domain: &Domain) -> Result<ExtensionalProgram, TransformError> {
    if p.base.has(var) {
        return Err(TransformError::VariableAlreadyInBase(var.clone()));
    }
    domain.validate()?;
    for (_, e) in p.executions() {
        for s in e.states() {
            if let Some(value) = s.get(var) {
                if !domain.contains(value) {
                    return Err(TransformError::AuxiliaryDomainMismatch {
                        var: var.clone(),
                        value: value.clone(),
                        domain: domain.clone(),
                    });
                }
            }
        }
    }
    let space = p.base.clone().with(var.clone(), domain.clone());
    let mut table = BTreeMap::new();
    let mut unknown = BTreeSet::new();
    for c in enumerate_states(&space, DEFAULT_ENUMERATION_BUDGET)? {
        let mut a = c.clone();
        a.remove(var);
        if p.unknown.contains(&a) {
            unknown.insert(c.clone());
        }
        let Some(es) = p.table.get(&a) else { continue };
        let extended = es.iter().map(|e| extend_execution(e, &c, var)).collect();
        table.insert(c, extended);
    }
    Ok(ExtensionalProgram { base: space, table, unknown })
}

fn extend_execution(e: &Execution, start: &State, var: &VarName) -> Execution {
    if e.prefix().is_empty() {
        return e.clone();
    }
    let mut carry = start.get(var).cloned().unwrap_or(Value::Undefined);
    let mut thread = |s: &State| -> State {
        match s.get(var) {
            Some(v) => {
                carry = v.clone();
                s.clone()
            }
            None => s.clone().with(var.clone(), carry.clone()),
        }
    };
    let mut prefix = vec![start.clone()];
    prefix.extend(e.prefix()[1..].iter().map(&mut thread));
    if e.is_finite() {
        return Execution::finite(prefix);
    }
    // Unroll the cycle until the carried value at re-entry repeats.
    let mut entries: Vec<Value> = Vec::new();
    let mut copies: Vec<Vec<State>> = Vec::new();
    loop {
        let entry = prefix_carry(&prefix, &copies, var);
        if let Some(pos) = entries.iter().position(|v| *v == entry) {
            prefix.extend(copies[..pos].iter().flatten().cloned());
            let cycle = copies[pos..].iter().flatten().cloned().collect();
            return Execution::lasso(prefix, cycle);
        }
        entries.push(entry);
        copies.push(e.cycle().iter().map(&mut thread).collect());
    }
}

fn prefix_carry(prefix: &[State], copies: &[Vec<State>], var: &VarName) -> Value {
    copies
        .last()
        .and_then(|c| c.last())
        .or(prefix.last())
        .and_then(|s| s.get(var))
        .cloned()
        .unwrap_or(Value::Undefined)
}

/// Extends the base space to `target`, one variable at a time in name order.
pub fn extend_to(p: &ExtensionalProgram, target: &StateSpace) -> Result<ExtensionalProgram, TransformError> {
    if !is_subspace(&p.base, target) {
        return Err(TransformError::NotASubspace { target: p.base.clone(), base: target.clone() });
    }
    let mut out = p.clone();
    for (n, d) in target.vars() {
        if !p.base.has(n) {
            out = extend(&out, n, d)?;
        }
    }
    Ok(out)
}

/// Shrinks the base space to `target`; the dropped base variables become
/// auxiliaries created by a new first step and destroyed by a new last step.
pub fn restrict(p: &ExtensionalProgram, target: &StateSpace) -> Result<ExtensionalProgram, TransformError> {
    if !is_subspace(target, &p.base) {
        return Err(TransformError::NotASubspace { target: target.clone(), base: p.base.clone() });
    }
    let mut table: BTreeMap<State, BTreeSet<Execution>> = enumerate_states(target, DEFAULT_ENUMERATION_BUDGET)?
        .into_iter()
        .map(|c| (c, BTreeSet::new()))
        .collect();
    let mut unknown = BTreeSet::new();
    for (a, es) in &p.table {
        let c = a.restrict_to(target.names());
        if p.unknown.contains(a) {
            unknown.insert(c.clone());
        }
        let row = table.entry(c.clone()).or_default();
        for e in es {
            let mut prefix = Vec::with_capacity(e.prefix().len() + 2);
            prefix.push(c.clone());
            prefix.extend(e.prefix().iter().cloned());
            if let Some(last) = e.last() {
                prefix.push(last.restrict_to(target.names()));
            }
            row.insert(Execution::lasso(prefix, e.cycle().to_vec()));
        }
    }
    for a in &p.unknown {
        unknown.insert(a.restrict_to(target.names()));
    }
    Ok(ExtensionalProgram { base: target.clone(), table, unknown })
}

/// Applies `steps` in order.
pub fn apply_steps(p: &ExtensionalProgram, steps: &[TransformStep]) -> Result<ExtensionalProgram, TransformError> {
    apply_side(p, steps, None)
}

fn apply_side(p: &ExtensionalProgram, steps: &[TransformStep], side: Option<Side>) -> Result<ExtensionalProgram, TransformError> {
    let mut cur = p.clone();
    for (index, step) in steps.iter().enumerate() {
        cur = step
            .apply(&cur)
            .map_err(|e| TransformError::InapplicableStep { side, index, source: Box::new(e) })?;
    }
    Ok(cur)
}

/// Whether the witness transforms `p` and `q` into equal programs.
pub fn check_identical(
    p: &ExtensionalProgram,
    q: &ExtensionalProgram,
    witness: &IdentityWitness,
) -> Result<bool, TransformError> {
    let left = apply_side(p, &witness.left, Some(Side::Left))?;
    let right = apply_side(q, &witness.right, Some(Side::Right))?;
    Ok(left == right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::validate_program;

    fn v(n: &str) -> VarName {
        VarName::new(n).unwrap()
    }
    fn int(a: i64, b: i64) -> Domain {
        Domain::int(a, b).unwrap()
    }
    fn st(bs: &[(&str, i64)]) -> State {
        State::from_bindings(bs.iter().map(|(n, x)| (v(n), Value::Int(*x))))
    }
    fn space(vars: &[(&str, Domain)]) -> StateSpace {
        StateSpace::new(vars.iter().map(|(n, d)| (v(n), d.clone())))
    }
    fn rm(pairs: &[(&str, &str)]) -> RenamingMap {
        RenamingMap::new(pairs.iter().map(|(a, b)| (v(a), v(b)))).unwrap()
    }
    fn program(base: StateSpace, rows: Vec<(State, Vec<Execution>)>) -> ExtensionalProgram {
        ExtensionalProgram::new(base, rows.into_iter().map(|(a, es)| (a, es.into_iter().collect())).collect())
    }

    /// x: int[0..1]; from x=0 go to x=1 through an auxiliary k, x=1 loops.
    fn with_aux() -> ExtensionalProgram {
        program(
            space(&[("x", int(0, 1))]),
            vec![
                (st(&[("x", 0)]), vec![Execution::finite(vec![st(&[("x", 0)]), st(&[("x", 0), ("k", 1)]), st(&[("x", 1)])])]),
                (st(&[("x", 1)]), vec![Execution::lasso(vec![st(&[("x", 1)])], vec![st(&[("x", 1), ("k", 0)])])]),
            ],
        )
    }

    #[test]
    fn rename_skip() {
        let skip = ExtensionalProgram::skip(space(&[("x", Domain::Bool)]), 16).unwrap();
        let r = rename(&skip, &rm(&[("x", "y")]), &RenamingMap::identity()).unwrap();
        assert_eq!(r, ExtensionalProgram::skip(space(&[("y", Domain::Bool)]), 16).unwrap());
    }

    #[test]
    fn rename_round_trip() {
        let p = with_aux();
        let nu = rm(&[("x", "y")]);
        let mu = rm(&[("k", "t")]);
        let r = rename(&p, &nu, &mu).unwrap();
        assert!(r.auxiliary_names().contains(&v("t")));
        assert_eq!(rename(&r, &nu.inverse(), &mu.inverse()).unwrap(), p);
    }

    #[test]
    fn rename_requires_complete_aux_map_and_no_collisions() {
        let p = with_aux();
        assert_eq!(
            rename(&p, &rm(&[("x", "y")]), &RenamingMap::identity()),
            Err(TransformError::IncompleteAuxiliaryMap(v("k")))
        );
        assert_eq!(rename(&p, &rm(&[("x", "k")]), &rm(&[("k", "k")])), Err(TransformError::NameCollision(v("k"))));
    }

    #[test]
    fn rename_onto_auxiliary_name_moves_the_auxiliary() {
        // Hand-applied: x becomes k, the old auxiliary k becomes k_1.
        let p = with_aux();
        let nu = rm(&[("x", "k")]);
        let mu = complete_aux_renaming(&p, &nu, &RenamingMap::identity());
        assert_eq!(mu, rm(&[("k", "k_1")]));
        let r = rename(&p, &nu, &mu).unwrap();
        let expected = Execution::finite(vec![st(&[("k", 0)]), st(&[("k", 0), ("k_1", 1)]), st(&[("k", 1)])]);
        assert_eq!(r.table[&st(&[("k", 0)])], BTreeSet::from([expected]));
        for (_, e) in r.executions() {
            for s in e.states() {
                assert!(s.len() <= 2);
            }
        }
    }

    #[test]
    fn extend_carries_new_variable() {
        let p = program(
            space(&[("x", int(0, 1))]),
            vec![
                (st(&[("x", 0)]), vec![Execution::finite(vec![st(&[("x", 0)]), st(&[("x", 1)])])]),
                (st(&[("x", 1)]), vec![Execution::single(st(&[("x", 1)]))]),
            ],
        );
        let e = extend(&p, &v("y"), &int(0, 1)).unwrap();
        assert_eq!(
            e.table[&st(&[("x", 0), ("y", 1)])],
            BTreeSet::from([Execution::finite(vec![st(&[("x", 0), ("y", 1)]), st(&[("x", 1), ("y", 1)])])])
        );
        assert_eq!(e.table.len(), 4);
        assert!(validate_program(&e, 64).unwrap().is_empty());
    }

    #[test]
    fn extend_skip_is_skip() {
        let skip = ExtensionalProgram::skip(space(&[("x", int(0, 1))]), 16).unwrap();
        let e = extend(&skip, &v("y"), &Domain::Bool).unwrap();
        assert_eq!(e, ExtensionalProgram::skip(space(&[("x", int(0, 1)), ("y", Domain::Bool)]), 16).unwrap());
    }

    #[test]
    fn extend_by_auxiliary_keeps_its_states() {
        let p = with_aux();
        let e = extend(&p, &v("k"), &int(0, 1)).unwrap();
        let expected =
            Execution::finite(vec![st(&[("x", 0), ("k", 0)]), st(&[("x", 0), ("k", 1)]), st(&[("x", 1), ("k", 1)])]);
        assert_eq!(e.table[&st(&[("x", 0), ("k", 0)])], BTreeSet::from([expected]));
        assert!(matches!(extend(&p, &v("k"), &int(0, 0)), Err(TransformError::AuxiliaryDomainMismatch { .. })));
        assert!(matches!(extend(&p, &v("x"), &int(0, 0)), Err(TransformError::VariableAlreadyInBase(_))));
    }

    #[test]
    fn extend_unrolls_cycle_until_carry_repeats() {
        // cycle alternates: one state binds k, the next does not.
        let p = program(
            space(&[("x", int(0, 0))]),
            vec![(st(&[("x", 0)]), vec![Execution::lasso(vec![st(&[("x", 0)])], vec![st(&[("x", 0), ("k", 1)]), st(&[("x", 0)])])])],
        );
        let e = extend(&p, &v("k"), &int(0, 1)).unwrap();
        // from k=0: 0,(k1),(k1 carried),(k1),(k1)... → prefix ⟨{k0}⟩ cycle ⟨{k1}⟩
        let got = &e.table[&st(&[("x", 0), ("k", 0)])];
        assert_eq!(
            got,
            &BTreeSet::from([Execution::lasso(vec![st(&[("x", 0), ("k", 0)])], vec![st(&[("x", 0), ("k", 1)])])])
        );
    }

    #[test]
    fn restrict_wraps_executions() {
        let p = program(
            space(&[("x", int(0, 1)), ("y", int(0, 0))]),
            vec![
                (st(&[("x", 0), ("y", 0)]), vec![Execution::finite(vec![st(&[("x", 0), ("y", 0)]), st(&[("x", 1), ("y", 0)])])]),
                (st(&[("x", 1), ("y", 0)]), vec![Execution::single(st(&[("x", 1), ("y", 0)]))]),
            ],
        );
        let r = restrict(&p, &space(&[("x", int(0, 1))])).unwrap();
        let expected = Execution::finite(vec![
            st(&[("x", 0)]),
            st(&[("x", 0), ("y", 0)]),
            st(&[("x", 1), ("y", 0)]),
            st(&[("x", 1)]),
        ]);
        assert_eq!(r.table[&st(&[("x", 0)])], BTreeSet::from([expected]));
        assert!(validate_program(&r, 16).unwrap().is_empty());
        assert!(matches!(restrict(&p, &space(&[("z", int(0, 1))])), Err(TransformError::NotASubspace { .. })));
    }

    #[test]
    fn restrict_to_full_space_duplicates_ends() {
        let skip = ExtensionalProgram::skip(space(&[("x", int(0, 1))]), 16).unwrap();
        let r = restrict(&skip, &skip.base).unwrap();
        for (a, e) in r.executions() {
            assert_eq!(e, &Execution::finite(vec![a.clone(), a.clone(), a.clone()]));
        }
    }

    #[test]
    fn restrict_unions_over_preimages() {
        let base = space(&[("x", int(0, 0)), ("y", int(0, 1))]);
        let skip = ExtensionalProgram::skip(base, 16).unwrap();
        let r = restrict(&skip, &space(&[("x", int(0, 0))])).unwrap();
        let row = &r.table[&st(&[("x", 0)])];
        let expected: BTreeSet<Execution> = (0..=1)
            .map(|y| {
                let a = st(&[("x", 0), ("y", y)]);
                Execution::finite(vec![st(&[("x", 0)]), a.clone(), st(&[("x", 0)])])
            })
            .collect();
        assert_eq!(row, &expected);
    }

    #[test]
    fn identity_witnesses() {
        let p = with_aux();
        assert!(check_identical(&p, &p, &IdentityWitness::default()).unwrap());
        let nu = rm(&[("x", "u")]);
        let mu = rm(&[("k", "k")]);
        let q = rename(&p, &nu, &mu).unwrap();
        let w = IdentityWitness { left: vec![TransformStep::Rename { base: nu, aux: mu }], right: vec![] };
        assert!(check_identical(&p, &q, &w).unwrap());
        let q2 = restrict(&extend(&p, &v("z"), &Domain::Bool).unwrap(), &p.base).unwrap();
        let w2 = IdentityWitness {
            left: vec![
                TransformStep::Extend { var: v("z"), domain: Domain::Bool },
                TransformStep::Restrict { space: p.base.clone() },
            ],
            right: vec![],
        };
        assert!(check_identical(&p, &q2, &w2).unwrap());
        assert!(!check_identical(&p, &q2, &IdentityWitness::default()).unwrap());
        let bad = IdentityWitness { left: vec![], right: vec![TransformStep::Extend { var: v("x"), domain: Domain::Bool }] };
        assert!(matches!(
            check_identical(&p, &p, &bad),
            Err(TransformError::InapplicableStep { side: Some(Side::Right), index: 0, .. })
        ));
    }

    #[test]
    fn witness_json() {
        let text = r#"{"left": [{"op":"extend","var":"k","domain":{"type":"int","min":0,"max":1}}, {"op":"restrict","space":{"vars":{"x":{"type":"int","min":0,"max":1}}}}, {"op":"rename","base":{"x":"y"},"aux":{}}], "right": []}"#;
        let w: IdentityWitness = serde_json::from_str(text).unwrap();
        assert_eq!(w.left.len(), 3);
        assert!(matches!(&w.left[2], TransformStep::Rename { base, .. } if base.apply(&v("x")) == &v("y")));
    }
}
