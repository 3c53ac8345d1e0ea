//! One line per acceptance criterion; exits nonzero when any fails.
//! `DONUT_CRITERIA=1,4,9` restricts the run to a subset.

use std::process::ExitCode;

use donut_cli::acceptance::{run_criteria, Criterion, Options};

fn selected() -> Vec<Criterion> {
    match std::env::var("DONUT_CRITERIA") {
        Ok(list) if !list.trim().is_empty() => list
            .split(',')
            .map(|c| {
                c.trim()
                    .parse()
                    .ok()
                    .and_then(Criterion::from_number)
                    .unwrap_or_else(|| panic!("unknown criterion '{c}'"))
            })
            .collect(),
        _ => Criterion::ALL.to_vec(),
    }
}

fn main() -> ExitCode {
    let criteria = selected();
    println!("running {} acceptance criteria", criteria.len());
    let results = run_criteria(&criteria, &Options::default());
    let mut failed = 0;
    for r in &results {
        println!("{}", r.line());
        failed += usize::from(!r.passed);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
