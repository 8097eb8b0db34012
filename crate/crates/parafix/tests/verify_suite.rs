//! The full verification suite must pass with the default seed.
//!
//! Each check samples its canonical instances deterministically, so a
//! violation here is a real numerical counterexample, not flakiness. The
//! per-check summary is printed so a failure names the offending bound.

use parafix::report::CheckReport;
use parafix::verify::{run_suite, write_report_text, CHECK_NAMES};
use parafix::DEFAULT_SEED;

#[test]
fn full_suite_has_zero_violations() {
    let reports = run_suite("all", DEFAULT_SEED).expect("suite construction should succeed");
    assert_eq!(reports.len(), CHECK_NAMES.len());

    let mut rendered = Vec::new();
    write_report_text(&reports, &mut rendered).unwrap();
    println!("{}", String::from_utf8(rendered).unwrap());

    let failing: Vec<&CheckReport> = reports.iter().filter(|r| !r.passed()).collect();
    assert!(
        failing.is_empty(),
        "checks with violations: {:?}",
        failing.iter().map(|r| r.name()).collect::<Vec<_>>()
    );
    for report in &reports {
        assert!(report.trials() > 0, "{} ran no trials", report.name());
    }
}

#[test]
fn suite_is_deterministic_for_a_fixed_seed() {
    let a = run_suite("stack_pc_22,mix_qne_pinf", 7).unwrap();
    let b = run_suite("stack_pc_22,mix_qne_pinf", 7).unwrap();
    let rows = |rs: &[CheckReport]| rs.iter().map(|r| r.csv_row()).collect::<Vec<_>>();
    assert_eq!(rows(&a), rows(&b));
}
