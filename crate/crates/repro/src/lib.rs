//! A small scorecard: numbered criteria made of named checks, one summary line each.

use std::fmt;
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub ok: bool,
    pub detail: String,
}

/// A check with a free-form observation.
pub fn check(label: impl Into<String>, ok: bool, detail: impl fmt::Display) -> Check {
    Check {
        label: label.into(),
        ok,
        detail: detail.to_string(),
    }
}

/// Exact equality, reporting both sides.
pub fn equal<T: PartialEq + fmt::Debug>(label: impl Into<String>, got: T, want: T) -> Check {
    let ok = got == want;
    check(label, ok, format!("{got:?} (want {want:?})"))
}

/// `|got - want| <= tol`.
pub fn within(label: impl Into<String>, got: f64, want: f64, tol: f64) -> Check {
    check(
        label,
        (got - want).abs() <= tol,
        format!("{got:.4} (want {want} ± {tol})"),
    )
}

#[derive(Debug, Clone)]
pub struct Criterion {
    pub number: u32,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Criterion {
    /// Runs `body`, timing it against `budget`; the budget is itself a check.
    pub fn run(
        number: u32,
        title: &'static str,
        budget: Duration,
        body: impl FnOnce() -> Vec<Check>,
    ) -> Self {
        let start = Instant::now();
        let mut checks = body();
        let elapsed = start.elapsed();
        checks.push(check(
            "runtime",
            elapsed <= budget,
            format!("{:.2?} (budget {budget:?})", elapsed),
        ));
        Self {
            number,
            title,
            checks,
            elapsed,
            budget,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "criterion {} [{}]: {verdict}", self.number, self.title)?;
        for (i, c) in self.checks.iter().enumerate() {
            let sep = if i == 0 { " -- " } else { "; " };
            let mark = if c.ok { "ok" } else { "FAILED" };
            write!(f, "{sep}{}: {} {mark}", c.label, c.detail)?;
        }
        Ok(())
    }
}
