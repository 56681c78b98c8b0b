//! Verification reports: one row per named check, with witnesses for failures.

use std::fmt::Write as _;

use serde::Serialize;

/// How many witnesses a failing check keeps.
pub const MAX_WITNESSES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub description: String,
    pub residual: f64,
}

/// One named check aggregated over many samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub failures: usize,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            samples: 0,
            max_residual: 0.0,
            failures: 0,
            passed: true,
            witnesses: Vec::new(),
        }
    }

    /// Record one sample. A residual that is not `<= tol` (including NaN)
    /// is a failure; the witness closure only runs for failures.
    pub fn record<F: FnOnce() -> String>(&mut self, residual: f64, tol: f64, witness: F) {
        self.samples += 1;
        if residual.is_nan() || residual > self.max_residual {
            self.max_residual = residual;
        }
        if residual.is_nan() || residual > tol {
            self.failures += 1;
            self.passed = false;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(Witness { description: witness(), residual });
            }
        }
    }

    /// Record a failure that has no numeric residual (an error during evaluation).
    pub fn record_error(&mut self, description: String) {
        self.samples += 1;
        self.failures += 1;
        self.passed = false;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(Witness { description, residual: f64::NAN });
        }
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "ok"
        } else {
            "FAIL"
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    /// Every check passed. An empty report passes vacuously.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Largest residual across checks.
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.max_residual).fold(0.0, f64::max)
    }

    /// Human-readable table; failing rows come first, each followed by
    /// its witnesses.
    pub fn render(&self) -> String {
        if self.checks.is_empty() {
            return "no checks run\n".into();
        }
        let mut rows: Vec<&Check> = self.checks.iter().collect();
        rows.sort_by_key(|c| c.passed);
        let width = rows.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>8}  {:>12}  status", "check", "samples", "max resid");
        for c in rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>8}  {:>12.3e}  {}",
                c.name,
                c.samples,
                c.max_residual,
                c.status()
            );
            for w in &c.witnesses {
                let _ = writeln!(out, "    witness: {} (residual {:.3e})", w.description, w.residual);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_renders_placeholder() {
        assert_eq!(Report::new().render(), "no checks run\n");
        assert!(Report::new().passed());
    }

    #[test]
    fn failing_rows_first() {
        let mut r = Report::new();
        let mut ok = Check::new("fine");
        ok.record(0.0, 1e-9, String::new);
        let mut bad = Check::new("broken");
        bad.record(1.0, 1e-9, || "x = 1".into());
        bad.record(f64::NAN, 1e-9, || "nan".into());
        r.push(ok);
        r.push(bad);
        let text = r.render();
        let broken = text.find("broken").unwrap();
        let fine = text.find("fine").unwrap();
        assert!(broken < fine);
        assert!(text.contains("witness: x = 1"));
        assert!(!r.passed());
        assert_eq!(r.check("broken").unwrap().failures, 2);
    }

    #[test]
    fn passing_rows_say_ok() {
        let mut r = Report::new();
        for name in ["a", "b"] {
            let mut c = Check::new(name);
            c.record(1e-12, 1e-9, String::new);
            r.push(c);
        }
        assert!(r.render().lines().skip(1).all(|l| l.ends_with("ok")));
    }
}
