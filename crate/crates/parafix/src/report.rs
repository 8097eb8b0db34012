//! Pass/fail bookkeeping for sampled checks.
//!
//! A check runs many comparisons, each with a "margin": the distance from
//! the observed values to the failure boundary, so positive means pass.
//! The report keeps every failing comparison and the smallest margin seen
//! anywhere, which says how close the whole check came to failing.

/// One failed comparison, with the two sides that were compared.
#[derive(Clone, Debug)]
pub struct Violation {
    pub context: String,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of one named check.
#[derive(Clone, Debug)]
pub struct CheckReport {
    name: String,
    trials: usize,
    violations: Vec<Violation>,
    worst_margin: Option<f64>,
    notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            trials: 0,
            violations: Vec::new(),
            worst_margin: None,
            notes: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    /// Count one logical trial (a sample, a pair, a window — the check's unit).
    pub fn add_trial(&mut self) {
        self.trials += 1;
    }

    pub fn add_trials(&mut self, k: usize) {
        self.trials += k;
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Smallest margin over all comparisons, failures included; `None` when
    /// the check recorded only boolean requirements.
    pub fn worst_margin(&self) -> Option<f64> {
        self.worst_margin
    }

    /// Attach a free-form remark (skipped probes, parameter summaries).
    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    fn record(&mut self, context: impl FnOnce() -> String, lhs: f64, rhs: f64, margin: f64) {
        self.worst_margin = Some(match self.worst_margin {
            Some(w) => w.min(margin),
            None => margin,
        });
        if !(margin > 0.0) {
            self.violations.push(Violation { context: context(), lhs, rhs });
        }
    }

    /// Strict inequality lhs < rhs, trusted only past the strictness slack.
    pub fn require_strict(&mut self, context: impl FnOnce() -> String, lhs: f64, rhs: f64) {
        let margin = rhs - crate::EPS_STRICT - lhs;
        self.record(context, lhs, rhs, margin);
    }

    /// Non-strict inequality lhs <= rhs, forgiving up to `tol`.
    pub fn require_le(&mut self, context: impl FnOnce() -> String, lhs: f64, rhs: f64, tol: f64) {
        let margin = rhs + tol - lhs;
        self.record(context, lhs, rhs, margin);
    }

    /// Equality |lhs - rhs| <= tol.
    pub fn require_close(&mut self, context: impl FnOnce() -> String, lhs: f64, rhs: f64, tol: f64) {
        let margin = tol - (lhs - rhs).abs();
        self.record(context, lhs, rhs, margin);
    }

    /// Boolean requirement; contributes no margin.
    pub fn require(&mut self, context: impl FnOnce() -> String, ok: bool) {
        if !ok {
            self.violations.push(Violation { context: context(), lhs: 0.0, rhs: 0.0 });
        }
    }

    /// Fold another report (usually over a different instance of the same
    /// property) into this one, keeping this report's name.
    pub fn absorb(&mut self, other: CheckReport) {
        self.trials += other.trials;
        self.violations.extend(other.violations);
        self.worst_margin = match (self.worst_margin, other.worst_margin) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.notes.extend(other.notes);
    }

    /// One-line human summary.
    pub fn summary_line(&self) -> String {
        let verdict = if self.passed() { "pass" } else { "FAIL" };
        let margin = match self.worst_margin {
            Some(m) => format!("{m:e}"),
            None => "-".to_string(),
        };
        format!(
            "{:<24} {:>8} trials  {:>4} violations  worst margin {:>12}  {}",
            self.name,
            self.trials,
            self.violations.len(),
            margin,
            verdict
        )
    }

    /// Row for the suite CSV: check,trials,violations,worst_margin.
    pub fn csv_row(&self) -> String {
        let margin = match self.worst_margin {
            Some(m) => format!("{m}"),
            None => "NaN".to_string(),
        };
        format!("{},{},{},{}", self.name, self.trials, self.violations.len(), margin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_requirement_uses_the_slack() {
        let mut r = CheckReport::new("strict");
        r.add_trial();
        r.require_strict(|| "wide".into(), 1.0, 2.0);
        assert!(r.passed());
        // Inside the slack: 2.0 - 1e-10 is not strictly less by enough.
        r.require_strict(|| "slack".into(), 2.0 - 5e-11, 2.0);
        assert!(!r.passed());
        assert_eq!(r.violations().len(), 1);
    }

    #[test]
    fn worst_margin_tracks_the_minimum() {
        let mut r = CheckReport::new("margins");
        r.require_le(|| "a".into(), 1.0, 2.0, 0.0);
        r.require_le(|| "b".into(), 1.9, 2.0, 0.0);
        assert!((r.worst_margin().unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn absorb_merges_counts_and_margins() {
        let mut a = CheckReport::new("a");
        a.add_trials(3);
        a.require_le(|| "x".into(), 0.0, 1.0, 0.0);
        let mut b = CheckReport::new("b");
        b.add_trials(2);
        b.require(|| "boolean failure".into(), false);
        a.absorb(b);
        assert_eq!(a.trials(), 5);
        assert_eq!(a.violations().len(), 1);
        assert!(!a.passed());
        assert_eq!(a.name(), "a");
    }

    #[test]
    fn csv_row_shape() {
        let mut r = CheckReport::new("shape");
        r.add_trial();
        r.require_le(|| "x".into(), 0.5, 1.0, 0.0);
        let row = r.csv_row();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 4);
        assert_eq!(fields[0], "shape");
        assert_eq!(fields[1], "1");
        assert_eq!(fields[2], "0");
        assert_eq!(fields[3].parse::<f64>().unwrap(), 0.5);
    }
}
