//! Run the Poisson-weight checks and print observed against predicted.
//!
//! Usage: cargo run --release --example lemma_suite -- [fast|full]

use smoothcdf::theory_checks::{run_suite, SuiteLevel};

fn main() -> smoothcdf::Result<()> {
    let level = match std::env::args().nth(1).as_deref() {
        Some("full") => SuiteLevel::Full,
        _ => SuiteLevel::Fast,
    };
    let report = run_suite(level)?;
    for c in &report.checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!(
            "{mark} {:<62} {:>14.8} vs {:>14.8} (tol {:.0e})",
            c.name, c.observed, c.predicted, c.tolerance
        );
    }
    println!("{} checks, all passed: {}", report.checks.len(), report.all_passed);
    Ok(())
}
