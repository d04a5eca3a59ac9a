use absprog_core::analysis::effect;
use absprog_core::program::{validate_program, EffectRelation, Length};
use absprog_core::state_space::{Domain, RenamingMap, DEFAULT_ENUMERATION_BUDGET};
use absprog_core::transforms::{complete_aux_renaming, extend, extend_to, rename, restrict};
use absprog_testkit::{name, random_base_renaming, random_program, random_space, rng};
use proptest::prelude::*;

fn renamed_effect(e: &EffectRelation, nu: &RenamingMap) -> EffectRelation {
    EffectRelation {
        space: absprog_core::state_space::StateSpace::new(
            e.space.vars().iter().map(|(n, d)| (nu.apply(n).clone(), d.clone())),
        ),
        graph: e
            .graph
            .iter()
            .map(|(a, bs)| (a.rename(nu), bs.iter().map(|b| b.rename(nu)).collect()))
            .collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rename_round_trips_and_preserves_shape(seed in any::<u64>()) {
        let mut r = rng(seed);
        let space = random_space(&mut r, 64);
        let p = random_program(&mut r, &space);
        let nu = random_base_renaming(&mut r, &space);
        let mu = complete_aux_renaming(&p, &nu, &RenamingMap::identity());
        let q = rename(&p, &nu, &mu).unwrap();
        prop_assert_eq!(validate_program(&q, DEFAULT_ENUMERATION_BUDGET).unwrap(), vec![]);
        let lengths = |p: &absprog_core::program::ExtensionalProgram| {
            let mut v: Vec<Length> = p.executions().map(|(_, e)| e.length()).collect();
            v.sort();
            v
        };
        prop_assert_eq!(lengths(&p), lengths(&q));
        let back = rename(&q, &nu.inverse(), &mu.inverse()).unwrap();
        prop_assert_eq!(back, p.clone());
        prop_assert_eq!(effect(&q).relation, renamed_effect(&effect(&p).relation, &nu));
    }

    #[test]
    fn extend_then_restrict_keeps_the_effect(seed in any::<u64>(), which in 0..3usize) {
        let mut r = rng(seed);
        let space = random_space(&mut r, 64);
        let p = random_program(&mut r, &space);
        let d = [Domain::Bool, Domain::int(0, 2).unwrap(), Domain::enumeration(["a", "b"]).unwrap()][which].clone();
        let e = extend(&p, &name("e"), &d).unwrap();
        prop_assert_eq!(validate_program(&e, DEFAULT_ENUMERATION_BUDGET).unwrap(), vec![]);
        for (c, ex) in e.executions() {
            let a = c.restrict_to(space.names());
            let originals = &p.table[&a];
            prop_assert!(originals.iter().any(|o| o.length() == ex.length()));
        }
        let back = restrict(&e, &space).unwrap();
        prop_assert_eq!(effect(&back).relation, effect(&p).relation);
    }

    #[test]
    fn restrict_adds_two_states_to_finite_executions(seed in any::<u64>()) {
        let mut r = rng(seed);
        let space = random_space(&mut r, 64);
        let p = random_program(&mut r, &space);
        let target = absprog_core::state_space::StateSpace::new(
            space.vars().iter().take(1).map(|(n, d)| (n.clone(), d.clone())),
        );
        let q = restrict(&p, &target).unwrap();
        prop_assert_eq!(validate_program(&q, DEFAULT_ENUMERATION_BUDGET).unwrap(), vec![]);
        let finite = |p: &absprog_core::program::ExtensionalProgram| {
            let mut v: Vec<usize> = p.executions().filter_map(|(_, e)| match e.length() {
                Length::Finite(n) => Some(n),
                Length::Infinite => None,
            }).collect();
            v.sort();
            v.dedup();
            v
        };
        let expected: Vec<usize> = finite(&p).into_iter().map(|n| n + 2).collect();
        let mut got = finite(&q);
        got.retain(|n| expected.contains(n));
        prop_assert_eq!(got, finite(&q));
    }

    #[test]
    fn extension_order_does_not_matter(seed in any::<u64>()) {
        let mut r = rng(seed);
        let space = random_space(&mut r, 16);
        let p = random_program(&mut r, &space);
        let target = space.clone().with(name("e"), Domain::Bool).with(name("f"), Domain::int(0, 1).unwrap());
        let sorted = extend_to(&p, &target).unwrap();
        let reversed = extend(&extend(&p, &name("f"), &Domain::int(0, 1).unwrap()).unwrap(), &name("e"), &Domain::Bool).unwrap();
        prop_assert_eq!(sorted, reversed);
    }
}
