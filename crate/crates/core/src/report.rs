use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of one inequality or rate certification.
///
/// Margins are signed slacks: `bound − observed` for upper bounds and
/// `observed − bound` for lower bounds, so a negative margin means the
/// observation is on the wrong side. A step counts as a violation only when
/// its margin falls below `−tol` for that step's tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub instance: String,
    pub params: BTreeMap<String, f64>,
    pub steps_checked: u64,
    pub violations: u64,
    pub worst_margin: f64,
    pub pass: bool,
    pub worst_step: Option<u64>,
    /// Named extremal or summary values (tightest factors, minima, counters).
    pub details: BTreeMap<String, f64>,
    /// Free-form remarks such as skipped sub-checks or vacuous passes.
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(check_id: impl Into<String>, instance: impl Into<String>) -> Self {
        Self {
            check_id: check_id.into(),
            instance: instance.into(),
            params: BTreeMap::new(),
            steps_checked: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            pass: true,
            worst_step: None,
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn param(&mut self, key: &str, value: f64) {
        self.params.insert(key.to_string(), value);
    }

    pub fn detail(&mut self, key: &str, value: f64) {
        self.details.insert(key.to_string(), value);
    }

    /// Keeps the smallest value seen under `key`.
    pub fn detail_min(&mut self, key: &str, value: f64) {
        let e = self.details.entry(key.to_string()).or_insert(f64::INFINITY);
        *e = e.min(value);
    }

    /// Keeps the largest value seen under `key`.
    pub fn detail_max(&mut self, key: &str, value: f64) {
        let e = self.details.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        *e = e.max(value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Records one evaluated inequality at `step`.
    pub fn observe(&mut self, step: u64, margin: f64, tol: f64) {
        self.steps_checked += 1;
        let bad = !(margin >= -tol);
        if bad {
            self.violations += 1;
        }
        // NaN margins are treated as worst possible
        let m = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        if m < self.worst_margin || (bad && self.violations == 1) {
            self.worst_margin = m;
            self.worst_step = Some(step);
        }
        self.pass = self.violations == 0;
    }

    /// Counts a failure that has no numeric margin, such as a refused input.
    pub fn fail(&mut self, step: u64, reason: impl Into<String>) {
        self.violations += 1;
        self.pass = false;
        self.worst_step.get_or_insert(step);
        self.worst_margin = self.worst_margin.min(f64::NEG_INFINITY);
        self.notes.push(reason.into());
    }

    /// Folds another report into this one, prefixing its details.
    pub fn absorb(&mut self, prefix: &str, other: &CheckReport) {
        self.steps_checked += other.steps_checked;
        self.violations += other.violations;
        if other.worst_margin < self.worst_margin {
            self.worst_margin = other.worst_margin;
            self.worst_step = other.worst_step;
        }
        for (k, v) in &other.details {
            self.details.insert(format!("{prefix}.{k}"), *v);
        }
        for n in &other.notes {
            self.notes.push(format!("{prefix}: {n}"));
        }
        self.pass = self.violations == 0;
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} [{}] {}: steps={} violations={} worst_margin={:.3e}",
            self.check_id,
            self.instance,
            if self.pass { "PASS" } else { "FAIL" },
            self.steps_checked,
            self.violations,
            self.worst_margin
        )
    }
}

/// Tolerance `atol + rtol·|bound|` used by the trajectory checks.
pub fn scaled_tol(bound: f64) -> f64 {
    1e-12 + 1e-9 * bound.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observe_tracks_worst_and_violations() {
        let mut r = CheckReport::new("x", "y");
        r.observe(0, 0.5, 0.0);
        r.observe(1, -1e-13, 1e-12);
        assert!(r.pass);
        assert_eq!(r.worst_step, Some(1));
        r.observe(2, -1.0, 1e-12);
        assert!(!r.pass);
        assert_eq!((r.violations, r.worst_step), (1, Some(2)));
        r.observe(3, f64::NAN, 1.0);
        assert_eq!(r.violations, 2);
    }

    #[test]
    fn absorb_merges() {
        let mut a = CheckReport::new("a", "i");
        let mut b = CheckReport::new("b", "i");
        b.observe(4, -2.0, 0.0);
        b.detail("k", 1.0);
        a.absorb("b", &b);
        assert!(!a.pass);
        assert_eq!(a.details.get("b.k"), Some(&1.0));
        assert_eq!(a.worst_step, Some(4));
    }
}
