//! The three commands behind the `parafix` binary.
//!
//! Each command takes plain arguments, prints its outcome, and returns a
//! process exit code instead of calling `exit` itself, so the whole
//! surface is callable from tests and other tooling:
//!
//! - [`cmd_run`]: load a scenario file, iterate it, and write `trace.csv`,
//!   `metrics.csv`, and `summary.txt` into the output directory. Exit 0
//!   when the run converged, 2 when it exhausted its horizon, 1 on any
//!   error (including schema violations, which are reported with the
//!   offending line and column).
//! - [`cmd_verify`]: run a selection of verification checks and write
//!   `report.csv`. Exit 0 only when every check passes without
//!   violations; unknown check names are errors.
//! - [`cmd_certify_graphs`]: search a scenario's graph schedule for a
//!   window length and offset under which every window composes to a
//!   strongly connected graph. Exit 0 with the certificate, 3 when no
//!   window length up to the bound certifies.
//!
//! Exit codes: 0 success, 1 error, 2 horizon exhausted, 3 not certified.

use std::fs;
use std::path::Path;

use crate::engine::{run, write_metrics_csv, write_summary, write_trace_csv};
use crate::error::Result;
use crate::graphs::{certify_rjsc, search_rjsc, RjscOutcome};
use crate::report::CheckReport;
use crate::scenario::ScenarioFile;
use crate::verify::{run_check, write_report_csv, write_report_text};

/// Exit code: command succeeded.
pub const EXIT_OK: i32 = 0;
/// Exit code: any error (bad file, bad arguments, failed check).
pub const EXIT_ERROR: i32 = 1;
/// Exit code: the run stopped at its horizon without converging.
pub const EXIT_HORIZON: i32 = 2;
/// Exit code: the schedule could not be certified within the bounds.
pub const EXIT_NOT_CERTIFIED: i32 = 3;

/// Run the scenario in `scenario_path` and write the trace, the metrics,
/// and a summary into `out_dir`.
pub fn cmd_run(scenario_path: &Path, out_dir: &Path) -> i32 {
    match run_inner(scenario_path, out_dir) {
        Ok(converged) => {
            if converged {
                EXIT_OK
            } else {
                println!("horizon exhausted without convergence");
                EXIT_HORIZON
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn run_inner(scenario_path: &Path, out_dir: &Path) -> Result<bool> {
    let file = ScenarioFile::load(scenario_path)?;
    let scenario = file.to_scenario()?;
    let trace = run(&scenario)?;

    fs::create_dir_all(out_dir)?;
    let mut trace_csv = fs::File::create(out_dir.join("trace.csv"))?;
    write_trace_csv(&trace, &mut trace_csv)?;
    let mut metrics_csv = fs::File::create(out_dir.join("metrics.csv"))?;
    write_metrics_csv(&trace, &mut metrics_csv)?;
    let mut summary = fs::File::create(out_dir.join("summary.txt"))?;
    write_summary(&trace, &mut summary)?;

    let last = trace.final_step();
    println!(
        "{} after {} steps: disagreement {:e}, residual {:e}",
        if trace.converged() { "converged" } else { "stopped" },
        trace.len(),
        last.disagreement,
        last.residual,
    );
    println!("wrote {}", out_dir.join("trace.csv").display());
    println!("wrote {}", out_dir.join("metrics.csv").display());
    println!("wrote {}", out_dir.join("summary.txt").display());

    // The file may bundle verification checks with the run; any
    // violation is an error, not a convergence verdict.
    if !file.verify.is_empty() {
        let reports = file
            .verify
            .iter()
            .map(|name| run_check(name, file.seed()))
            .collect::<Result<Vec<_>>>()?;
        let mut rendered = Vec::new();
        write_report_text(&reports, &mut rendered)?;
        print!("{}", String::from_utf8_lossy(&rendered));
        if let Some(bad) = reports.iter().find(|r| !r.passed()) {
            return Err(crate::Error::Precondition(format!(
                "verification check {} reported violations",
                bad.name()
            )));
        }
    }
    Ok(trace.converged())
}

/// Run the selected verification checks and write `report.csv` into
/// `out_dir`. `selector` is `"all"` or a comma-separated name list.
pub fn cmd_verify(selector: &str, seed: u64, out_dir: &Path) -> i32 {
    match verify_inner(selector, seed, out_dir) {
        Ok(reports) => {
            if reports.iter().all(CheckReport::passed) {
                EXIT_OK
            } else {
                EXIT_ERROR
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn verify_inner(selector: &str, seed: u64, out_dir: &Path) -> Result<Vec<CheckReport>> {
    let reports = crate::verify::run_suite(selector, seed)?;
    fs::create_dir_all(out_dir)?;
    let mut csv = fs::File::create(out_dir.join("report.csv"))?;
    write_report_csv(&reports, &mut csv)?;

    let mut rendered = Vec::new();
    write_report_text(&reports, &mut rendered)?;
    print!("{}", String::from_utf8_lossy(&rendered));
    println!("wrote {}", out_dir.join("report.csv").display());
    Ok(reports)
}

/// Search the scenario's schedule for a certifying window length `l <=
/// l_max` (checking `k_max` windows per candidate) and print the result.
pub fn cmd_certify_graphs(scenario_path: &Path, l_max: usize, k_max: usize) -> i32 {
    match certify_inner(scenario_path, l_max, k_max) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_NOT_CERTIFIED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn certify_inner(scenario_path: &Path, l_max: usize, k_max: usize) -> Result<bool> {
    let scenario = ScenarioFile::load(scenario_path)?.to_scenario()?;
    match search_rjsc(&scenario.schedule, l_max, k_max)? {
        Some(cert) => {
            println!(
                "certified: every window of length {} starting at step {} composes to a \
                 strongly connected graph ({} windows checked)",
                cert.l, cert.rho0, cert.windows_checked
            );
            Ok(true)
        }
        None => {
            // No (length, offset) pair works; show where the largest
            // window length that fits the horizon breaks down.
            match certify_rjsc(&scenario.schedule, l_max, 1, k_max) {
                Ok(RjscOutcome::FailedWindow { k, start, end }) => println!(
                    "not certified: no window length up to {l_max} works; at length {l_max} \
                     the first failing window is k = {k} (steps {start}..={end})"
                ),
                Ok(RjscOutcome::Certified(_)) => unreachable!("search missed a certifying pair"),
                Err(_) => println!(
                    "not certified: no window length up to {l_max} works within the \
                     schedule's horizon"
                ),
            }
            Ok(false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_file_is_an_error_exit() {
        let dir = tempfile::tempdir().unwrap();
        let code = cmd_run(&dir.path().join("nosuch.json"), dir.path());
        assert_eq!(code, EXIT_ERROR);
    }

    #[test]
    fn unknown_check_is_an_error_exit() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(cmd_verify("nosuchcheck", 42, dir.path()), EXIT_ERROR);
    }

    #[test]
    fn single_check_verify_writes_the_report() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(cmd_verify("counterexample", 42, dir.path()), EXIT_OK);
        let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert!(csv.starts_with("check,trials,violations,worst_margin\n"));
        assert!(csv.contains("counterexample,"));
    }
}
