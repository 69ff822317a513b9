//! Pass/fail bookkeeping for the acceptance run.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    /// `criterion  N` or `example`.
    pub label: String,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Verdict {
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{} {tag}  {} [{:.2?}]  {}", self.label, self.title, self.elapsed, self.detail)
    }
}

/// Accumulates named sub-checks of one criterion.
#[derive(Debug, Default)]
pub struct Checks {
    passed: bool,
    notes: String,
}

impl Checks {
    pub fn new() -> Self {
        Self { passed: true, notes: String::new() }
    }

    /// Records `ok` with a short description of what was measured.
    pub fn check(&mut self, ok: bool, what: impl AsRef<str>) -> bool {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        let _ = write!(self.notes, "{}{}", if ok { "" } else { "✗ " }, what.as_ref());
        self.passed &= ok;
        ok
    }

    pub fn fail(&mut self, what: impl AsRef<str>) {
        self.check(false, what);
    }
}

/// Runs `body` and times it; a runtime budget, when given, is part of the verdict.
pub fn criterion(id: usize, title: &'static str, budget: Option<Duration>, body: impl FnOnce(&mut Checks)) -> Verdict {
    run(format!("criterion {id:>2}"), title, budget, body)
}

/// A module-level example, reported like a criterion.
pub fn example(title: &'static str, body: impl FnOnce(&mut Checks)) -> Verdict {
    run("example     ".into(), title, None, body)
}

fn run(label: String, title: &'static str, budget: Option<Duration>, body: impl FnOnce(&mut Checks)) -> Verdict {
    let start = Instant::now();
    let mut checks = Checks::new();
    body(&mut checks);
    let elapsed = start.elapsed();
    if let Some(b) = budget {
        checks.check(elapsed <= b, format!("runtime {elapsed:.2?} ≤ {b:?}"));
    }
    Verdict { label, title, passed: checks.passed, detail: checks.notes, elapsed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_stick() {
        let v = criterion(1, "t", None, |c| {
            c.check(true, "a");
            c.check(false, "b");
            c.check(true, "c");
        });
        assert!(!v.passed);
        assert!(v.line().contains("FAIL") && v.detail.contains("✗ b"));
    }

    #[test]
    fn budget_counts() {
        let v = criterion(2, "t", Some(Duration::ZERO), |_| std::thread::sleep(Duration::from_millis(2)));
        assert!(!v.passed);
    }
}
