use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

fn docs(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/programs").join(name).to_string_lossy().into_owned()
}

fn absprog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_absprog")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn check_reports_scope_errors_with_positions() {
    let dir = TempDir::new().unwrap();
    let ok = absprog(&["check", &docs("skip.prog")]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = write(&dir, "bad.prog", "space x: int[0..1]\nbegin\n  x := y\nend\n");
    let out = absprog(&["check", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains(":3:8: scope error: unknown variable `y`"), "{}", stdout(&out));
    let missing = absprog(&["check", "/nonexistent/p.prog"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn check_names_the_violated_condition_of_a_table() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "p.json",
        r#"{"space": {"vars": {"x": {"type": "bool"}}},
            "table": [{"from": {"x": false}, "executions": [{"prefix": [{"x": false}]}]}]}"#,
    );
    let out = absprog(&["check", &p, "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["violations"][0]["condition"], 1);
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(absprog(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(absprog(&["effect", &docs("skip.prog"), "--max-steps", "0"]).status.code(), Some(3));
    assert_eq!(absprog(&["trace", &docs("skip.prog"), "--all", "--one"]).status.code(), Some(3));
    assert_eq!(absprog(&["--help"]).status.code(), Some(0));
}

#[test]
fn trace_prints_executions() {
    let out = absprog(&["trace", &docs("skip.prog"), "--init", r#"{"x":0}"#]);
    assert_eq!(stdout(&out), "⟨{x:0}⟩\n");
    let out = absprog(&["trace", &docs("loop.prog"), "--init", r#"{"x":0}"#]);
    assert_eq!(stdout(&out), "⟨{x:0}⟩ (cycle: {x:0})*\n");
    let out = absprog(&["trace", &docs("var_block.prog"), "--init", r#"{"x":1}"#]);
    assert_eq!(stdout(&out), "⟨{x:1}, {k:1, x:1}, {k:1, x:2}, {x:2}⟩\n");
    let out = absprog(&["trace", &docs("skip.ext.json"), "--init", r#"{"x":1}"#]);
    assert_eq!(stdout(&out), "⟨{x:1}⟩\n");
}

#[test]
fn trace_one_picks_the_first_of_all() {
    let all = stdout(&absprog(&["trace", &docs("max_one_guard.prog"), "--init", r#"{"x":5,"y":2,"m":0}"#, "--all"]));
    let one = stdout(&absprog(&["trace", &docs("max_one_guard.prog"), "--init", r#"{"x":5,"y":2,"m":0}"#, "--one"]));
    assert_eq!(all.lines().next(), one.lines().next());
    assert_eq!(one.lines().count(), 1);
}

#[test]
fn invalid_init_state_exits_2() {
    assert_eq!(absprog(&["trace", &docs("skip.prog"), "--init", r#"{"x":7}"#]).status.code(), Some(2));
    assert_eq!(absprog(&["trace", &docs("skip.prog"), "--init", "not json"]).status.code(), Some(2));
    assert_eq!(absprog(&["trace", &docs("skip.ext.json"), "--init", r#"{"y":0}"#]).status.code(), Some(2));
}

#[test]
fn effect_dumps_round_trip_through_json() {
    let out = absprog(&["effect", &docs("skip.prog")]);
    assert_eq!(stdout(&out), "space: {x: int[0..1]}\ndomain: 2 of 2 states\n{x:0} -> {x:0}\n{x:1} -> {x:1}\n");
    let out = absprog(&["effect", &docs("loop.prog")]);
    assert!(stdout(&out).contains("domain: 0 of 2 states"));
    let out = absprog(&["effect", &docs("max.prog"), "--format", "json"]);
    let rel: absprog_core::program::EffectRelation = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rel.graph.len(), 512);
}

#[test]
fn partial_effects_warn_but_succeed() {
    let out = absprog(&["effect", &docs("countdown.prog"), "--max-depth", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("unknown: "));
    assert!(stderr(&out).contains("warning: exploration budget exhausted"));
}

#[test]
fn solves_follows_the_exit_code_contract() {
    assert_eq!(absprog(&["solves", &docs("identity.problem.json"), &docs("skip.prog")]).status.code(), Some(0));
    let fails = absprog(&["solves", &docs("identity.problem.json"), &docs("loop.prog")]);
    assert_eq!(fails.status.code(), Some(1));
    assert!(stdout(&fails).contains("{x:0}: diverges"));

    let dir = TempDir::new().unwrap();
    let zero = write(
        &dir,
        "zero.json",
        r#"{"space": {"vars": {"n": {"type": "int", "min": 0, "max": 10}, "r": {"type": "int", "min": 0, "max": 10}}},
            "pre": "n = 10", "post": "r' = 0 and n' = n"}"#,
    );
    assert_eq!(absprog(&["solves", &zero, &docs("countdown.prog")]).status.code(), Some(0));
    assert_eq!(absprog(&["solves", &zero, &docs("countdown.prog"), "--max-depth", "3"]).status.code(), Some(2));

    let mismatch = absprog(&["solves", &docs("identity_u.problem.json"), &docs("skip.prog")]);
    assert_eq!(mismatch.status.code(), Some(3));
    assert!(stderr(&mismatch).contains("transform"));
    let fixed = absprog(&["solves", &docs("identity_u.problem.json"), &docs("skip.prog"), "--transform", &docs("to_u.steps.json")]);
    assert_eq!(fixed.status.code(), Some(0));
    assert_eq!(stdout(&fixed), "transformed base space: {u: int[0..1]}\nholds\n");
}

#[test]
fn counterexamples_are_truncated() {
    let out = absprog(&["solves", &docs("max.problem.json"), &docs("max_one_guard.prog"), "--limit-counterexamples", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.starts_with("fails: 224 counterexamples\n"));
    assert!(text.contains("... 222 more"));
}

#[test]
fn equivalence_and_identity() {
    assert_eq!(absprog(&["equiv", &docs("skip.prog"), &docs("double_flip.prog")]).status.code(), Some(0));
    let out = absprog(&["equiv", &docs("skip.prog"), &docs("reset.prog")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("{x:1}"));
    assert_eq!(absprog(&["identical", &docs("skip.prog"), &docs("skip.prog")]).status.code(), Some(0));
    assert_eq!(absprog(&["identical", &docs("skip.prog"), &docs("skip.ext.json")]).status.code(), Some(0));
    let w = docs("extend_k.witness.json");
    assert_eq!(absprog(&["identical", &docs("skip.prog"), &docs("skip_xk.prog"), "--witness", &w]).status.code(), Some(0));
    assert_eq!(absprog(&["identical", &docs("skip.prog"), &docs("skip_xk.prog")]).status.code(), Some(1));
}

#[test]
fn inapplicable_witness_steps_are_named() {
    let dir = TempDir::new().unwrap();
    let w = write(
        &dir,
        "w.json",
        r#"{"left": [{"op": "extend", "var": "k", "domain": {"type": "bool"}},
                     {"op": "extend", "var": "k", "domain": {"type": "bool"}}]}"#,
    );
    let out = absprog(&["identical", &docs("skip.prog"), &docs("skip.prog"), "--witness", &w]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("left step 1"), "{}", stderr(&out));
}

#[test]
fn transform_examples() {
    let dir = TempDir::new().unwrap();
    let out = absprog(&["transform", &docs("skip.prog"), "--extend", "k:int[0..1]"]);
    assert_eq!(out.status.code(), Some(0));
    let p: absprog_core::program::ExtensionalProgram = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(p.table.len(), 4);
    assert!(p.executions().all(|(a, e)| e.prefix() == std::slice::from_ref(a)));

    assert_eq!(absprog(&["transform", &docs("skip.prog"), "--restrict", "y"]).status.code(), Some(3));

    let original = stdout(&absprog(&["transform", &docs("swap.prog")]));
    let renamed = write(&dir, "renamed.json", &stdout(&absprog(&["transform", &docs("swap.prog"), "--rename", "a=c"])));
    let back = stdout(&absprog(&["transform", &renamed, "--rename", "c=a"]));
    assert_eq!(back, original);
}

#[test]
fn globals_need_a_flag() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "g.prog",
        "space x: int[0..3]\nsub (r: int[0..3]) := f()\n  r := x\nend\nbegin (x) := f() end\n",
    );
    assert_eq!(absprog(&["check", &p]).status.code(), Some(1));
    assert_eq!(absprog(&["check", &p, "--allow-globals"]).status.code(), Some(0));
    let out = absprog(&["effect", &p, "--allow-globals"]);
    assert!(stdout(&out).contains("{x:2} -> {x:2}"), "{}", stdout(&out));
}
