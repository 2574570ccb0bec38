//! Report records and their plain-text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use loglattice::Settings;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub name: String,
    pub operation: String,
    /// A spec document (or control description) reproducing the item.
    pub inputs: serde_json::Value,
    /// The check is a negative control: it passes when the underlying check fails.
    #[serde(default)]
    pub expect_failure: bool,
    pub outputs: Option<serde_json::Value>,
    /// Every window-certified quantity agreed across the enlargement policy.
    pub stable: bool,
    pub pass: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub error: Option<String>,
    pub elapsed_ms: u64,
}

impl Item {
    pub fn status(&self) -> &'static str {
        match (&self.error, self.pass) {
            (Some(_), _) => "ERROR",
            (None, true) if self.expect_failure => "PASS (control)",
            (None, true) => "PASS",
            (None, false) => "FAIL",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub settings: Settings,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog_seed: Option<u64>,
    /// Sorted by name.
    pub items: Vec<Item>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub criteria: BTreeMap<String, bool>,
    pub strict: bool,
    pub pass: bool,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn new(command: &str, settings: Settings, seed: Option<u64>, mut items: Vec<Item>, strict: bool) -> Self {
        items.sort_by(|a, b| a.name.cmp(&b.name));
        let pass = items
            .iter()
            .all(|i| i.pass && i.error.is_none() && (!strict || i.warnings.is_empty()));
        Report {
            command: command.into(),
            settings,
            seed,
            catalog_seed: None,
            items,
            criteria: BTreeMap::new(),
            strict,
            pass,
            elapsed_ms: 0,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let width = self.items.iter().map(|i| i.name.len()).max().unwrap_or(4).max(4);
        let _ = writeln!(
            out,
            "{} (grow rounds {}, step {}, max dim {}{})",
            self.command,
            self.settings.grow_rounds,
            self.settings.grow_step,
            self.settings.max_dim,
            self.seed.map(|s| format!(", seed {s}")).unwrap_or_default()
        );
        let _ = writeln!(
            out,
            "{:<width$}  {:<14}  {:<8}  {:>8}",
            "item", "status", "stable", "ms"
        );
        for i in &self.items {
            let _ = writeln!(
                out,
                "{:<width$}  {:<14}  {:<8}  {:>8}",
                i.name,
                i.status(),
                if i.stable { "yes" } else { "no" },
                i.elapsed_ms
            );
            if let Some(e) = &i.error {
                let _ = writeln!(out, "    error: {e}");
            }
            for w in &i.warnings {
                let _ = writeln!(out, "    warning: {w}");
            }
        }
        for (k, v) in &self.criteria {
            let _ = writeln!(out, "criterion {k}: {}", if *v { "PASS" } else { "FAIL" });
        }
        let passed = self.items.iter().filter(|i| i.pass && i.error.is_none()).count();
        let _ = writeln!(
            out,
            "{passed}/{} items pass; overall {} in {} ms",
            self.items.len(),
            if self.pass { "PASS" } else { "FAIL" },
            self.elapsed_ms
        );
        out
    }
}
