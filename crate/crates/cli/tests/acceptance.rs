//! Acceptance suite: one PASS/FAIL line per criterion, at the default
//! validation profile. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Duration;

use ltk_cli::validate::{determinism, replay_threads, run_criteria, CriterionReport, ValidateProfile};

/// Wall-clock budgets, where one is stated.
fn budget(id: u32) -> Option<Duration> {
    match id {
        1 | 3 => Some(Duration::from_secs(120)),
        2 => Some(Duration::from_secs(60)),
        _ => None,
    }
}

fn line(c: &CriterionReport) -> bool {
    let over = budget(c.id).filter(|b| c.elapsed > *b);
    let ok = c.passed && over.is_none();
    println!(
        "{} criterion {}: {} ({:.1} s{})",
        if ok { "PASS" } else { "FAIL" },
        c.id,
        c.title,
        c.elapsed.as_secs_f64(),
        budget(c.id).map(|b| format!(" of {} s budget", b.as_secs())).unwrap_or_default()
    );
    for k in c.checks.iter().filter(|k| !k.passed) {
        println!("    failed: {} = {:.6e} (tolerance {:e})", k.name, k.measured, k.tolerance);
    }
    ok
}

fn main() -> ExitCode {
    let profile = ValidateProfile::default();
    let mut all = true;
    let reports = run_criteria(&profile);
    for c in &reports {
        all &= line(c);
    }
    all &= line(&determinism(&profile, &reports, replay_threads()));
    println!("acceptance: {}", if all { "all criteria pass" } else { "FAILURES" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
