//! Acceptance suite: every criterion at its stated tolerance and runtime budget.
//! Runs without the libtest harness so the per-criterion lines always print.

use std::collections::BTreeMap;
use std::process::ExitCode;

use tempora_cli::{run_criterion, CRITERIA};

fn main() -> ExitCode {
    let mut failures = Vec::new();
    println!("\nrunning {} acceptance criteria", CRITERIA.len());
    for c in CRITERIA {
        let outcome = match run_criterion(c.id, &BTreeMap::new(), 0) {
            Ok(o) => o,
            Err(e) => {
                println!("FAIL criterion {:>2}: {} (error: {e})", c.id, c.title);
                failures.push(c.id);
                continue;
            }
        };
        let seconds = outcome.elapsed.as_secs_f64();
        let within_budget = c.budget_seconds.is_none_or(|b| seconds < b);
        let ok = outcome.passed && within_budget;
        let budget = c.budget_seconds.map_or("no budget".to_string(), |b| format!("budget {b} s"));
        println!("{} criterion {:>2}: {} ({seconds:.3} s, {budget})", if ok { "PASS" } else { "FAIL" }, c.id, c.title);
        for check in outcome.checks.iter().filter(|k| !k.passed) {
            println!("       failed check {}: value {:?}, threshold {:?}", check.name, check.value, check.threshold);
        }
        if !ok {
            failures.push(c.id);
        }
    }
    if failures.is_empty() {
        println!("acceptance: all {} criteria passed\n", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failures:?}\n");
        ExitCode::FAILURE
    }
}
