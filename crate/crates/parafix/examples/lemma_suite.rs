//! Run the entire numerical verification suite.
//!
//! Seventeen named checks bind the convergence machinery's structural
//! claims to sampled instances: contraction properties of single maps
//! and stacks, strictness gained (and lost) through mixing, exact
//! equality witnesses where bounds are tight, the distance chains of a
//! full run, and the frozen-agent counterexample. Every check is
//! deterministic in the seed; a violation prints both sides of the
//! failed comparison.
//!
//! The same suite is available from the command line as
//! `parafix verify --suite all --seed 42`.

use parafix::verify::{run_suite, write_report_text, CHECK_NAMES};
use parafix::DEFAULT_SEED;

fn main() -> parafix::Result<()> {
    println!("running {} checks with seed {DEFAULT_SEED}...\n", CHECK_NAMES.len());
    let reports = run_suite("all", DEFAULT_SEED)?;

    let mut rendered = Vec::new();
    write_report_text(&reports, &mut rendered)?;
    print!("{}", String::from_utf8_lossy(&rendered));

    let total_trials: usize = reports.iter().map(|r| r.trials()).sum();
    println!("\n{total_trials} trials in total");
    assert!(reports.iter().all(|r| r.passed()), "the default suite passes at the default seed");
    Ok(())
}
