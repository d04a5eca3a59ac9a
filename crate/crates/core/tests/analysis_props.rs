use std::collections::{BTreeMap, BTreeSet};

use absprog_core::analysis::{effect, equivalent, solves, Verdict};
use absprog_core::program::{ExtensionalProgram, Problem};
use absprog_core::state_space::{RenamingMap, State, StateSpace};
use absprog_core::transforms::{complete_aux_renaming, rename};
use absprog_testkit::*;
use proptest::prelude::*;
use rand::Rng;

const LIMIT: usize = 20;

/// Straight from the table: every execution from every domain state is
/// finite and ends in an allowed state.
fn solves_oracle(f: &Problem, p: &ExtensionalProgram) -> bool {
    f.graph.iter().all(|(a, allowed)| {
        let es = p.table.get(a).expect("total");
        es.iter().all(|e| e.is_finite() && allowed.contains(e.prefix().last().unwrap()))
    })
}

fn finals(p: &ExtensionalProgram) -> BTreeMap<State, Option<BTreeSet<State>>> {
    p.table
        .iter()
        .map(|(a, es)| {
            let f = es.iter().all(|e| e.is_finite()).then(|| es.iter().map(|e| e.prefix().last().unwrap().clone()).collect());
            (a.clone(), f)
        })
        .collect()
}

fn rename_problem(f: &Problem, nu: &RenamingMap) -> Problem {
    let space = StateSpace::new(f.space.vars().iter().map(|(n, d)| (nu.apply(n).clone(), d.clone())));
    let graph = f.graph.iter().map(|(a, bs)| (a.rename(nu), bs.iter().map(|b| b.rename(nu)).collect())).collect();
    Problem::new(space, graph).unwrap()
}

fn setup(seed: u64) -> (ChaCha8Rng, ExtensionalProgram) {
    let mut r = rng(seed);
    let space = random_space(&mut r, 32);
    let p = random_program(&mut r, &space);
    (r, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn solves_matches_the_table_oracle(seed in any::<u64>()) {
        let (mut r, p) = setup(seed);
        let f = if r.gen_bool(0.5) { problem_near(&mut r, &p) } else { random_problem(&mut r, &p.base) };
        let v = solves(&f, &p, LIMIT).unwrap();
        prop_assert_eq!(v.holds(), solves_oracle(&f, &p));
        let decided = !matches!(v, Verdict::Unknown { .. });
        prop_assert!(decided);
    }

    #[test]
    fn equivalence_matches_the_finals_oracle(seed in any::<u64>()) {
        let (mut r, p) = setup(seed);
        let q = if r.gen_bool(0.5) { effect_preserving_variant(&mut r, &p) } else { perturb(&mut r, &p) };
        let v = equivalent(&p, &q, LIMIT).unwrap();
        prop_assert_eq!(v.holds(), finals(&p) == finals(&q));
        prop_assert_eq!(v.holds(), effect(&p).relation == effect(&q).relation);
    }

    #[test]
    fn equivalence_is_an_equivalence(seed in any::<u64>()) {
        let (mut r, p) = setup(seed);
        let q = effect_preserving_variant(&mut r, &p);
        let s = effect_preserving_variant(&mut r, &q);
        prop_assert!(equivalent(&p, &p, LIMIT).unwrap().holds());
        prop_assert!(equivalent(&p, &q, LIMIT).unwrap().holds());
        prop_assert!(equivalent(&q, &p, LIMIT).unwrap().holds());
        prop_assert!(equivalent(&q, &s, LIMIT).unwrap().holds());
        prop_assert!(equivalent(&p, &s, LIMIT).unwrap().holds());
        let t = perturb(&mut r, &p);
        prop_assert_eq!(equivalent(&p, &t, LIMIT).unwrap().holds(), equivalent(&t, &p, LIMIT).unwrap().holds());
    }

    #[test]
    fn equivalent_programs_solve_the_same_problems(seed in any::<u64>()) {
        let (mut r, p) = setup(seed);
        let q = effect_preserving_variant(&mut r, &p);
        for _ in 0..4 {
            let f = problem_near(&mut r, &p);
            prop_assert_eq!(solves(&f, &p, LIMIT).unwrap().holds(), solves(&f, &q, LIMIT).unwrap().holds());
        }
    }

    #[test]
    fn weaker_problems_stay_solved(seed in any::<u64>()) {
        let (mut r, p) = setup(seed);
        let f = problem_near(&mut r, &p);
        prop_assume!(solves(&f, &p, LIMIT).unwrap().holds());
        let all = states(&p.base);
        let mut graph = BTreeMap::new();
        for (a, bs) in &f.graph {
            if r.gen_bool(0.7) {
                let mut bs = bs.clone();
                bs.extend(all.iter().filter(|_| r.gen_bool(0.2)).cloned());
                graph.insert(a.clone(), bs);
            }
        }
        let weaker = Problem::new(f.space.clone(), graph).unwrap();
        prop_assert!(solves(&weaker, &p, LIMIT).unwrap().holds());
    }

    #[test]
    fn solutions_transfer_across_renaming(seed in any::<u64>()) {
        let (mut r, p) = setup(seed);
        let f = if r.gen_bool(0.5) { problem_near(&mut r, &p) } else { random_problem(&mut r, &p.base) };
        let nu = random_base_renaming(&mut r, &p.base);
        let mu = complete_aux_renaming(&p, &nu, &RenamingMap::identity());
        let q = rename(&p, &nu, &mu).unwrap();
        let g = rename_problem(&f, &nu);
        prop_assert_eq!(solves(&f, &p, LIMIT).unwrap().holds(), solves(&g, &q, LIMIT).unwrap().holds());
    }

    #[test]
    fn counterexamples_are_capped(seed in any::<u64>(), limit in 0..4usize) {
        let (mut r, p) = setup(seed);
        let f = random_problem(&mut r, &p.base);
        if let Verdict::Fails { counterexamples, total } = solves(&f, &p, limit).unwrap() {
            prop_assert_eq!(counterexamples.len(), total.min(limit));
            prop_assert!(counterexamples.iter().all(|c| f.graph.contains_key(&c.state)));
        }
    }
}
