//! Text and JSON renderings of results.

use std::collections::BTreeSet;
use std::fmt::Write;

use absprog_core::analysis::{Effect, Verdict};
use absprog_core::program::Execution;
use absprog_core::semantics::RunOutcome;
use absprog_core::state_space::{State, StateSpace};
use serde_json::{json, Value};

fn states(ss: &[State]) -> String {
    ss.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn outcome_text(o: &RunOutcome) -> String {
    match o {
        RunOutcome::Terminated(e) | RunOutcome::ProvenDivergent(e) => e.to_string(),
        RunOutcome::BudgetExceeded(trace) => format!("⟨{}, …⟩ (budget exceeded)", states(trace)),
    }
}

pub fn outcome_json(o: &RunOutcome) -> Value {
    match o {
        RunOutcome::Terminated(e) => json!({"outcome": "terminated", "execution": e}),
        RunOutcome::ProvenDivergent(e) => json!({"outcome": "diverges", "execution": e}),
        RunOutcome::BudgetExceeded(trace) => json!({"outcome": "budget_exceeded", "states": trace}),
    }
}

/// Table executions reuse the machine's outcome shapes.
pub fn execution_outcome(e: &Execution) -> RunOutcome {
    if e.is_finite() {
        RunOutcome::Terminated(e.clone())
    } else {
        RunOutcome::ProvenDivergent(e.clone())
    }
}

pub fn effect_text(eff: &Effect, total: usize) -> String {
    let mut out = String::new();
    let graph = &eff.relation.graph;
    writeln!(out, "space: {{{}}}", eff.relation.space).unwrap();
    writeln!(out, "domain: {} of {total} states", graph.len()).unwrap();
    for (a, bs) in graph {
        writeln!(out, "{a} -> {}", states(&bs.iter().cloned().collect::<Vec<_>>())).unwrap();
    }
    if !eff.unknown.is_empty() {
        writeln!(out, "unknown: {}", states(&eff.unknown.iter().cloned().collect::<Vec<_>>())).unwrap();
    }
    out
}

pub fn effect_json(eff: &Effect) -> Value {
    let mut v = serde_json::to_value(&eff.relation).expect("serializable");
    v["unknown"] = json!(eff.unknown);
    v
}

pub fn verdict_text(v: &Verdict) -> String {
    let mut out = String::new();
    match v {
        Verdict::Holds => out.push_str("holds\n"),
        Verdict::Fails { counterexamples, total } => {
            writeln!(out, "fails: {total} counterexample{}", if *total == 1 { "" } else { "s" }).unwrap();
            for c in counterexamples {
                writeln!(out, "  {}: {}", c.state, c.reason).unwrap();
            }
            if *total > counterexamples.len() {
                writeln!(out, "  ... {} more", total - counterexamples.len()).unwrap();
            }
        }
        Verdict::Unknown { states: ss } => {
            writeln!(out, "unknown: budget exhausted for {} start state{}", ss.len(), if ss.len() == 1 { "" } else { "s" })
                .unwrap();
            for s in ss {
                writeln!(out, "  {s}").unwrap();
            }
        }
    }
    out
}

pub fn verdict_json(v: &Verdict, space: Option<&StateSpace>) -> Value {
    let mut j = serde_json::to_value(v).expect("serializable");
    if let Some(s) = space {
        j["space"] = json!(s);
    }
    j
}

pub fn unknown_warning(unknown: &BTreeSet<State>) {
    if !unknown.is_empty() {
        eprintln!("warning: exploration budget exhausted for {} start state(s)", unknown.len());
    }
}
