use std::collections::BTreeSet;

use absprog_core::analysis::effect;
use absprog_core::program::validate_program;
use absprog_core::semantics::{
    inline_calls, parse, print_program, run_all, to_extensional, Budget, Machine, ParseOptions, RunOutcome,
};
use absprog_core::state_space::DEFAULT_ENUMERATION_BUDGET;
use absprog_testkit::{random_program_text, rng, states};

fn extensional(ast: &absprog_core::semantics::ProgramAst) -> absprog_core::program::ExtensionalProgram {
    let m = Machine::new(ast, ParseOptions::default()).unwrap();
    to_extensional(&m, &Budget::default(), DEFAULT_ENUMERATION_BUDGET).unwrap()
}

#[test]
fn inlining_preserves_effects() {
    let mut r = rng(5);
    for _ in 0..50 {
        let text = random_program_text(&mut r);
        let ast = parse(&text, ParseOptions::default()).unwrap().ast;
        let inlined = inline_calls(&ast).unwrap();
        let (p, q) = (extensional(&ast), extensional(&inlined));
        assert!(p.unknown.is_empty() && q.unknown.is_empty(), "{text}");
        assert_eq!(effect(&p), effect(&q), "{text}\n---\n{}", print_program(&inlined));
    }
}

#[test]
fn inlined_programs_print_and_reparse() {
    let mut r = rng(6);
    for _ in 0..30 {
        let ast = parse(&random_program_text(&mut r), ParseOptions::default()).unwrap().ast;
        let inlined = inline_calls(&ast).unwrap();
        let reparsed = parse(&print_program(&inlined), ParseOptions::default()).unwrap().ast;
        assert_eq!(reparsed, inlined);
    }
}

#[test]
fn generated_programs_satisfy_the_program_conditions() {
    let mut r = rng(7);
    for _ in 0..30 {
        let text = random_program_text(&mut r);
        let ast = parse(&text, ParseOptions::default()).unwrap().ast;
        let p = extensional(&ast);
        assert_eq!(validate_program(&p, DEFAULT_ENUMERATION_BUDGET).unwrap(), vec![], "{text}");
        // Every state binds every base variable within its domain.
        for (_, e) in p.executions() {
            assert!(e.states().all(|s| p.base.is_covered_by(s)), "{text}");
        }
    }
}

#[test]
fn block_locals_live_strictly_inside_executions() {
    let mut r = rng(8);
    for _ in 0..30 {
        let ast = parse(&random_program_text(&mut r), ParseOptions::default()).unwrap().ast;
        let p = extensional(&ast);
        for (_, e) in p.executions().filter(|(_, e)| e.is_finite()) {
            let states: Vec<_> = e.states().collect();
            let (first, last) = (states[0], states[states.len() - 1]);
            assert!(first.names().all(|n| p.base.has(n)));
            assert!(last.names().all(|n| p.base.has(n)));
        }
    }
}

#[test]
fn exploration_is_deterministic() {
    let mut r = rng(9);
    for _ in 0..10 {
        let ast = parse(&random_program_text(&mut r), ParseOptions::default()).unwrap().ast;
        let m = Machine::new(&ast, ParseOptions::default()).unwrap();
        for a in states(m.base()) {
            let one: Vec<RunOutcome> = run_all(&m, &a, &Budget::default()).unwrap().into_iter().collect();
            let two: Vec<RunOutcome> = run_all(&m, &a, &Budget::default()).unwrap().into_iter().collect();
            assert_eq!(one, two);
        }
        let p = to_extensional(&m, &Budget::default(), DEFAULT_ENUMERATION_BUDGET).unwrap();
        let q = to_extensional(&m, &Budget::default(), DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), serde_json::to_string(&q).unwrap());
    }
}

#[test]
fn small_budgets_account_for_missing_paths() {
    let src = "space x: int[0..3] begin while x < 3 do choose x := x + 1 [] skip endchoose od end";
    let ast = parse(src, ParseOptions::default()).unwrap().ast;
    let m = Machine::new(&ast, ParseOptions::default()).unwrap();
    for a in states(m.base()) {
        let full = run_all(&m, &a, &Budget::default()).unwrap();
        assert!(full.iter().all(|o| !matches!(o, RunOutcome::BudgetExceeded(_))));
        let cut = run_all(&m, &a, &Budget { max_steps: 4, max_depth: 64 }).unwrap();
        assert!(!cut.is_empty());
        let finals: BTreeSet<_> = cut.iter().filter_map(|o| o.execution()).collect();
        assert!(finals.iter().all(|e| full.iter().any(|o| o.execution() == Some(*e))));
    }
}

#[test]
fn recursive_activations_do_not_share_formals() {
    // Each activation writes its own copy of `acc`; the caller's copy is
    // untouched by the callee except through the output parameter.
    let src = "space n: int[0..3], r: int[0..3]
        sub (out: int[0..3]) := f(m: int[0..3])
          var acc: int[0..3] := m in
            if m = 0 -> out := 0
            [] m > 0 -> (out) := f(m - 1); out := acc
            fi
          end
        end
        begin (r) := f(n) end";
    let ast = parse(src, ParseOptions::default()).unwrap().ast;
    let p = extensional(&ast);
    let eff = effect(&p);
    for (a, bs) in &eff.relation.graph {
        let n = a.get(&absprog_testkit::name("n")).unwrap().clone();
        assert!(bs.iter().all(|b| b.get(&absprog_testkit::name("r")) == Some(&n)));
    }
}
