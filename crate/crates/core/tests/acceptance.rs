//! Acceptance gate. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails.
//!
//! Numeric arguments select criteria, e.g.
//! `cargo test --test acceptance -- 2 7`. Criteria run one at a time so
//! that runtime budgets measure a single workload.

use std::process::ExitCode;

use dissipative_chain::experiments::acceptance;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for id in 1..=acceptance::CRITERIA {
            println!("criterion_{id}: test");
        }
        return ExitCode::SUCCESS;
    }
    let mut selected: Vec<usize> = args.iter().filter_map(|a| a.parse().ok()).collect();
    if selected.is_empty() {
        selected = (1..=acceptance::CRITERIA).collect();
    }
    if let Some(bad) = selected.iter().find(|&&id| !(1..=acceptance::CRITERIA).contains(&id)) {
        eprintln!("no acceptance criterion {bad}");
        return ExitCode::FAILURE;
    }

    let mut failed = 0;
    for &id in &selected {
        let report = acceptance::run(id);
        println!("{report}");
        if !report.passed {
            failed += 1;
        }
    }
    println!("\nacceptance: {} passed; {} failed", selected.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
