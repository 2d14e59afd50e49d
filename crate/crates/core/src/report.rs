//! Pass/fail reports produced by validators and verifiers.
//!
//! A report never aborts: it lists every check with a witness for failures,
//! so callers can decide whether a violation is fatal.

use std::fmt;

#[derive(Debug, Clone)]
pub struct CheckItem {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub items: Vec<CheckItem>,
}

impl Report {
    pub fn new() -> Self {
        Report { items: Vec::new() }
    }

    pub fn pass(&mut self, name: &str, detail: impl Into<String>) {
        self.items.push(CheckItem {
            name: name.to_string(),
            pass: true,
            detail: detail.into(),
        });
    }

    pub fn fail(&mut self, name: &str, witness: impl Into<String>) {
        self.items.push(CheckItem {
            name: name.to_string(),
            pass: false,
            detail: witness.into(),
        });
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        if pass {
            self.pass(name, detail);
        } else {
            self.fail(name, detail);
        }
    }

    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckItem> {
        self.items.iter().find(|i| !i.pass)
    }

    /// One-line summary of all failures, for error messages.
    pub fn failure_summary(&self) -> String {
        self.items
            .iter()
            .filter(|i| !i.pass)
            .map(|i| format!("{}: {}", i.name, i.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            writeln!(
                f,
                "[{}] {}{}",
                if item.pass { "pass" } else { "FAIL" },
                item.name,
                if item.detail.is_empty() {
                    String::new()
                } else {
                    format!(" — {}", item.detail)
                }
            )?;
        }
        Ok(())
    }
}
