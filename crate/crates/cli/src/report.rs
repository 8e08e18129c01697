//! Command reports with agreeing machine- and human-readable renderings.

use serde::Serialize;
use std::time::Instant;

/// Stable exit-code contract: 0 pass, 1 property falsified, 2 input error,
/// 3 solver inconclusive.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FALSIFIED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Info,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportItem {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub items: Vec<ReportItem>,
    pub wall_clock_ms: u128,
    pub exit_code: i32,
    #[serde(skip)]
    started: Option<Instant>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            command: command.into(),
            items: Vec::new(),
            wall_clock_ms: 0,
            exit_code: EXIT_PASS,
            started: Some(Instant::now()),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, outcome: Outcome, detail: impl Into<String>) {
        self.items.push(ReportItem {
            name: name.into(),
            outcome,
            detail: detail.into(),
            data: None,
        });
    }

    pub fn push_data(
        &mut self,
        name: impl Into<String>,
        outcome: Outcome,
        detail: impl Into<String>,
        data: serde_json::Value,
    ) {
        self.items.push(ReportItem {
            name: name.into(),
            outcome: outcome,
            detail: detail.into(),
            data: Some(data),
        });
    }

    /// Seals the report, deriving the exit code from the items.
    pub fn finish(&mut self) -> i32 {
        if let Some(t) = self.started.take() {
            self.wall_clock_ms = t.elapsed().as_millis();
        }
        let failed = self.items.iter().any(|i| i.outcome == Outcome::Fail);
        let inconclusive = self
            .items
            .iter()
            .any(|i| i.outcome == Outcome::Inconclusive);
        self.exit_code = if failed {
            EXIT_FALSIFIED
        } else if inconclusive {
            EXIT_INCONCLUSIVE
        } else {
            EXIT_PASS
        };
        self.exit_code
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {}\n", self.command));
        for item in &self.items {
            let tag = match item.outcome {
                Outcome::Pass => "PASS",
                Outcome::Fail => "FAIL",
                Outcome::Info => "INFO",
                Outcome::Inconclusive => "????",
            };
            out.push_str(&format!("{tag} {}: {}\n", item.name, item.detail));
        }
        out.push_str(&format!(
            "exit {} ({} ms)\n",
            self.exit_code, self.wall_clock_ms
        ));
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
