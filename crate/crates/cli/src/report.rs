//! Verdict report: versioned JSON schema plus CSV cell formatting.

use std::collections::BTreeMap;

use serde::Serialize;

use bubblelab_core::bubble::BubbleVerdict;
use bubblelab_core::olg::NecessityReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub model: String,
    pub necessity: NecessityJson,
    pub verdict: Option<VerdictJson>,
    pub diagnostics: Vec<String>,
    /// Model-specific scalars; keys are sorted so reruns are byte-identical.
    pub extra: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize)]
pub struct NecessityJson {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "G_d")]
    pub g_d: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub holds: bool,
    pub borderline: bool,
}

impl From<&NecessityReport<f64>> for NecessityJson {
    fn from(n: &NecessityReport<f64>) -> Self {
        Self {
            r: n.autarky_rate,
            g_d: n.dividend_growth,
            g: n.growth,
            holds: n.holds,
            borderline: n.borderline,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerdictJson {
    pub label: String,
    /// Absent when no decay rate could be fitted.
    pub tail_decay: Option<f64>,
    pub relevance: Option<f64>,
}

impl VerdictJson {
    pub fn new(verdict: &BubbleVerdict<f64>, label: &str) -> Self {
        Self {
            label: label.to_string(),
            tail_decay: finite(verdict.tail_decay),
            relevance: verdict.relevance_liminf.and_then(finite),
        }
    }

    pub fn from_verdict(verdict: &BubbleVerdict<f64>) -> Self {
        Self::new(verdict, verdict.label.as_str())
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl Report {
    pub fn new(model: &str, necessity: &NecessityReport<f64>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            model: model.to_string(),
            necessity: necessity.into(),
            verdict: None,
            diagnostics: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn push_extra(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.extra.insert(key.to_string(), value);
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// CSV cell: default float formatting ('.' decimal, shortest round-trip),
/// empty for NaN.
pub fn cell(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}
