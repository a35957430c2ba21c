//! Reports: per-check records with residuals, a deterministic overall
//! verdict, and human or JSON emission.

use std::time::Duration;

#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    pub residual: Option<f64>,
    pub details: String,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub scenario: String,
    pub suite: String,
    pub checks: Vec<CheckRecord>,
    pub elapsed: Duration,
}

impl Report {
    pub fn new(scenario: impl Into<String>, suite: impl Into<String>) -> Self {
        Report {
            scenario: scenario.into(),
            suite: suite.into(),
            checks: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn push(
        &mut self,
        name: impl Into<String>,
        pass: bool,
        residual: Option<f64>,
        details: impl Into<String>,
    ) {
        self.checks.push(CheckRecord {
            name: name.into(),
            pass,
            residual,
            details: details.into(),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn emit_human(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("scenario: {} (suite: {})\n", self.scenario, self.suite));
        for c in &self.checks {
            let status = if c.pass { "PASS" } else { "FAIL" };
            let residual = match c.residual {
                Some(r) => format!("  residual {r:.3e}"),
                None => String::new(),
            };
            let details = if c.details.is_empty() {
                String::new()
            } else {
                format!("  ({})", c.details)
            };
            out.push_str(&format!("  [{status}] {}{residual}{details}\n", c.name));
        }
        let verdict = if self.all_pass() { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "verdict: {verdict} ({} checks, {:.1} ms)\n",
            self.checks.len(),
            self.elapsed.as_secs_f64() * 1e3
        ));
        out
    }

    pub fn emit_json(&self) -> String {
        // residuals as decimal strings at full precision; stable field order
        let checks: Vec<serde_json::Value> = self
            .checks
            .iter()
            .map(|c| {
                let mut m = serde_json::Map::new();
                m.insert("name".into(), serde_json::Value::String(c.name.clone()));
                m.insert("pass".into(), serde_json::Value::Bool(c.pass));
                m.insert(
                    "residual".into(),
                    match c.residual {
                        Some(r) => serde_json::Value::String(format!("{r:e}")),
                        None => serde_json::Value::Null,
                    },
                );
                m.insert("details".into(), serde_json::Value::String(c.details.clone()));
                serde_json::Value::Object(m)
            })
            .collect();
        let mut root = serde_json::Map::new();
        root.insert("scenario".into(), serde_json::Value::String(self.scenario.clone()));
        root.insert("suite".into(), serde_json::Value::String(self.suite.clone()));
        root.insert("checks".into(), serde_json::Value::Array(checks));
        root.insert(
            "verdict".into(),
            serde_json::Value::String(if self.all_pass() { "pass" } else { "fail" }.into()),
        );
        serde_json::to_string_pretty(&serde_json::Value::Object(root)).expect("serialize report")
    }
}
