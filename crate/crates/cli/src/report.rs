//! Report model and its two renderings.
//!
//! The machine format is JSON Lines: a header line, one line per check, a
//! summary line, then timing lines. Everything except the `{"timing":...}`
//! lines is a pure function of the command parameters.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA: &str = "ghz-comm-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub pass: bool,
    pub details: Map<String, Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Check {
            check: name.into(),
            pass,
            details: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub label: String,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub params: Params,
    pub checks: Vec<Check>,
    pub timing: Vec<Timing>,
}

#[derive(Serialize)]
struct Header<'a> {
    schema: &'a str,
    command: &'a str,
    params: &'a Params,
}

#[derive(Serialize)]
struct Summary {
    passed: usize,
    failed: usize,
    pass: bool,
}

impl Report {
    pub fn new(command: &str, params: Params) -> Self {
        Report {
            command: command.to_string(),
            params,
            checks: Vec::new(),
            timing: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn time(&mut self, label: impl Into<String>, elapsed: Duration) {
        self.timing.push(Timing {
            label: label.into(),
            millis: elapsed.as_secs_f64() * 1e3,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn summary(&self) -> Summary {
        let passed = self.checks.iter().filter(|c| c.pass).count();
        Summary {
            passed,
            failed: self.checks.len() - passed,
            pass: self.passed(),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => self.render_machine(),
            Format::Text => self.render_text(),
        }
    }

    fn render_machine(&self) -> String {
        let mut out = String::new();
        let mut line = |v: Value| {
            out.push_str(&v.to_string());
            out.push('\n');
        };
        line(serde_json::to_value(Header {
            schema: SCHEMA,
            command: &self.command,
            params: &self.params,
        })
        .expect("header serializes"));
        for c in &self.checks {
            line(serde_json::to_value(c).expect("check serializes"));
        }
        line(serde_json::json!({ "summary": self.summary() }));
        for t in &self.timing {
            line(serde_json::json!({ "timing": t }));
        }
        out
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ghz-comm {} ({SCHEMA})", self.command);
        let p = &self.params;
        let mut params = Vec::new();
        if let Some(n) = p.n {
            params.push(format!("n={n}"));
        }
        if let Some(seed) = p.seed {
            params.push(format!("seed={seed}"));
        }
        if let Some(scope) = &p.scope {
            params.push(format!("scope={scope}"));
        }
        if let Some(w) = p.workers {
            params.push(format!("workers={w}"));
        }
        if !params.is_empty() {
            let _ = writeln!(out, "params: {}", params.join(" "));
        }
        for c in &self.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "[{tag}] {}", c.check);
            for (k, v) in &c.details {
                let shown = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let _ = writeln!(out, "       {k}: {shown}");
            }
        }
        let s = self.summary();
        let _ = writeln!(out, "summary: {}/{} passed", s.passed, s.passed + s.failed);
        for t in &self.timing {
            let _ = writeln!(out, "time {}: {:.1} ms", t.label, t.millis);
        }
        out
    }
}
