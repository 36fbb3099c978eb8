//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! MCBELL_FULL_ROW=1 runs all four cells of the I_4_3_1 row of the five-party search grid.
//! MCBELL_STRICT=1 makes any failing criterion fail the process.
//! MCBELL_ONLY=3,7 restricts the run to the listed criteria.

use mcbell::repro::{run_criterion, summary_line, ReproOptions, TITLES};

fn flag(name: &str) -> bool {
    std::env::var(name).map_or(false, |v| v == "1")
}

fn main() {
    let opts = ReproOptions { full_row: flag("MCBELL_FULL_ROW"), ..ReproOptions::default() };
    let ids: Vec<usize> = match std::env::var("MCBELL_ONLY") {
        Ok(s) => s.split(',').filter_map(|x| x.trim().parse().ok()).collect(),
        Err(_) => (1..=TITLES.len()).collect(),
    };
    let mut failed = 0;
    for id in ids {
        let r = run_criterion(id, &opts);
        println!("{}", summary_line(&r));
        failed += usize::from(!r.passed);
    }
    println!("acceptance: {failed} criteria failed");
    if failed > 0 && flag("MCBELL_STRICT") {
        std::process::exit(1);
    }
}
