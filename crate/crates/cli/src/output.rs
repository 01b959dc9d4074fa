//! Report rendering: a human text mode and a deterministic structured tree.
//!
//! The structured format is a self-describing indented `key = value`
//! document with stable ordering; two runs with the same problem and seed
//! produce byte-identical structured output (timing appears only in the
//! text footer).

use jetvar_core::report::Report;
use std::time::Duration;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Structured,
}

enum Node {
    Kv(String, String),
    Section(String, Vec<(String, bool, String)>),
}

pub struct OutputDoc {
    command: String,
    nodes: Vec<Node>,
}

impl OutputDoc {
    pub fn new(command: &str) -> Self {
        OutputDoc { command: command.to_string(), nodes: Vec::new() }
    }

    pub fn kv(&mut self, key: &str, value: &str) {
        self.nodes.push(Node::Kv(key.to_string(), value.to_string()));
    }

    pub fn report(&mut self, name: &str, report: &Report) {
        let items = report
            .items
            .iter()
            .map(|i| (i.name.clone(), i.passed, i.detail.clone()))
            .collect();
        self.nodes.push(Node::Section(name.to_string(), items));
    }

    pub fn render(&self, format: OutputFormat, elapsed: Duration) -> String {
        match format {
            OutputFormat::Text => self.render_text(elapsed),
            OutputFormat::Structured => self.render_structured(),
        }
    }

    fn render_text(&self, elapsed: Duration) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            match node {
                Node::Kv(k, v) => out.push_str(&format!("{k} = {v}\n")),
                Node::Section(name, items) => {
                    out.push_str(&format!("[{name}]\n"));
                    for (label, passed, detail) in items {
                        let verdict = if *passed { "pass" } else { "FAIL" };
                        if detail.is_empty() {
                            out.push_str(&format!("  {verdict}  {label}\n"));
                        } else {
                            out.push_str(&format!("  {verdict}  {label}: {detail}\n"));
                        }
                    }
                }
            }
        }
        out.push_str(&format!("elapsed = {:.3}s\n", elapsed.as_secs_f64()));
        out
    }

    fn render_structured(&self) -> String {
        let mut out = String::new();
        out.push_str("jetvar-report\n");
        out.push_str(&format!("  command = {}\n", self.command));
        for node in &self.nodes {
            match node {
                Node::Kv(k, v) => out.push_str(&format!("  {k} = {v}\n")),
                Node::Section(name, items) => {
                    out.push_str(&format!("  suite {name}\n"));
                    for (label, passed, detail) in items {
                        out.push_str(&format!("    check {label}\n"));
                        out.push_str(&format!(
                            "      verdict = {}\n",
                            if *passed { "pass" } else { "fail" }
                        ));
                        if !detail.is_empty() {
                            out.push_str(&format!("      detail = {detail}\n"));
                        }
                    }
                }
            }
        }
        out
    }
}
