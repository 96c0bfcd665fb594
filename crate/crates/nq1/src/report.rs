//! Structured command reports.
//!
//! JSON is the canonical form (`schema` 1); the human rendering is derived
//! from the same data. Reports are deterministic: item order follows check
//! order, maps are sorted, and all numbers are exact strings.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ReportItem {
    pub name: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub status: String,
    pub items: Vec<ReportItem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<serde_json::Value>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            schema: 1,
            command: command.into(),
            status: "pass".into(),
            items: Vec::new(),
            output: None,
        }
    }

    pub fn push_pass(&mut self, name: impl Into<String>) {
        self.items.push(ReportItem {
            name: name.into(),
            status: "pass".into(),
            witness: None,
        });
    }

    pub fn push_fail(&mut self, name: impl Into<String>, witness: Option<String>) {
        self.status = "fail".into();
        self.items.push(ReportItem {
            name: name.into(),
            status: "fail".into(),
            witness,
        });
    }

    pub fn push(&mut self, name: impl Into<String>, passed: bool, witness: Option<String>) {
        if passed {
            self.push_pass(name);
        } else {
            self.push_fail(name, witness);
        }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }

    pub fn set_output(&mut self, output: serde_json::Value) {
        self.output = Some(output);
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            match (&item.status[..], &item.witness) {
                ("pass", _) => out.push_str(&format!("[PASS] {}\n", item.name)),
                (_, Some(w)) => out.push_str(&format!("[FAIL] {}: {}\n", item.name, w)),
                (_, None) => out.push_str(&format!("[FAIL] {}\n", item.name)),
            }
        }
        out.push_str(&format!("{}: {}\n", self.command, self.status));
        out
    }
}
