use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::theorems::ArrowKind;
use super::HarnessError;
use crate::detectors::{Budget, Level, Verdict};

pub const REPORT_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The implication holds on this instance.
    Consistent,
    /// Premise definitively holds and conclusion definitively fails.
    Counterexample,
    /// A verdict was not definitive.
    Inconclusive,
    /// The system lies outside the theorem's hypotheses; run as a probe only.
    HypothesisNotMet,
    /// A non-implication is exhibited by this instance.
    Witnessed,
    /// This instance does not exhibit the non-implication.
    Unwitnessed,
}

impl Status {
    pub const ALL: [Status; 6] = [
        Status::Consistent,
        Status::Counterexample,
        Status::Inconclusive,
        Status::HypothesisNotMet,
        Status::Witnessed,
        Status::Unwitnessed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Status::Consistent => "consistent",
            Status::Counterexample => "counterexample",
            Status::Inconclusive => "inconclusive",
            Status::HypothesisNotMet => "hypothesis_not_met",
            Status::Witnessed => "witnessed",
            Status::Unwitnessed => "unwitnessed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowRecord {
    pub premise_level: Level,
    pub conclusion_level: Level,
    pub premise: String,
    pub conclusion: String,
    /// 1-based statement numbers within the theorem.
    pub statements: (usize, usize),
    pub kind: ArrowKind,
}

impl ArrowRecord {
    pub fn label(&self) -> String {
        let op = match self.kind {
            ArrowKind::Implies => "=>",
            ArrowKind::NotImplies => "!=>",
        };
        format!("{}{op}{}", self.statements.0, self.statements.1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub theorem: String,
    pub system: String,
    pub n: usize,
    pub arrow: ArrowRecord,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub verdicts: BTreeMap<String, Verdict>,
}

/// Totals for an exhaustive run over all endomaps of a small set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationSummary {
    pub point_count: usize,
    pub maps: usize,
    pub counterexamples: usize,
    pub status_counts: BTreeMap<Status, usize>,
    /// `level:claim` → outcome → count, over every verdict used.
    pub verdict_counts: BTreeMap<String, BTreeMap<String, usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub budget: Budget,
    pub results: Vec<CheckResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration: Option<EnumerationSummary>,
}

impl Report {
    pub fn new(budget: Budget) -> Self {
        Report {
            version: REPORT_VERSION.to_string(),
            budget,
            results: Vec::new(),
            notes: Vec::new(),
            enumeration: None,
        }
    }

    pub fn counterexamples(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| r.status == Status::Counterexample)
    }

    pub fn status_counts(&self) -> BTreeMap<Status, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.results {
            *counts.entry(r.status).or_insert(0) += 1;
        }
        counts
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["theorem", "system", "n", "arrow", "premise", "conclusion", "status", "witness"])
            .expect("in-memory write");
        for r in &self.results {
            let premise = format!("{}:{}", r.arrow.premise_level, r.arrow.premise);
            let conclusion = format!("{}:{}", r.arrow.conclusion_level, r.arrow.conclusion);
            w.write_record([
                r.theorem.as_str(),
                r.system.as_str(),
                &r.n.to_string(),
                &r.arrow.label(),
                &premise,
                &conclusion,
                r.status.name(),
                r.witness.as_deref().unwrap_or(""),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Theorem suite report\n");
        let _ = writeln!(
            out,
            "version {} | horizon {} | m_max {} | work cap {}\n",
            self.version, self.budget.horizon, self.budget.m_max, self.budget.work_cap
        );
        let counts = self.status_counts();
        let summary: Vec<String> = counts.iter().map(|(s, c)| format!("{} {c}", s.name())).collect();
        let _ = writeln!(out, "{} results: {}\n", self.results.len(), summary.join(", "));
        for note in &self.notes {
            let _ = writeln!(out, "- {note}");
        }
        if !self.notes.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "| theorem | system | n | arrow | premise | conclusion | status | witness |");
        let _ = writeln!(out, "|---|---|---|---|---|---|---|---|");
        for r in &self.results {
            let cell = |s: &str| s.replace('|', "\\|").replace('\n', " ");
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {}:{} | {}:{} | {} | {} |",
                r.theorem,
                cell(&r.system),
                r.n,
                r.arrow.label(),
                r.arrow.premise_level,
                r.arrow.premise,
                r.arrow.conclusion_level,
                r.arrow.conclusion,
                r.status.name(),
                cell(r.witness.as_deref().unwrap_or("")),
            );
        }
        if let Some(e) = &self.enumeration {
            let _ = writeln!(
                out,
                "\nEnumerated {} maps on {} points: {} counterexamples.",
                e.maps, e.point_count, e.counterexamples
            );
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Markdown => self.to_markdown(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(HarnessError::UnknownFormat(other.to_string())),
        }
    }
}

/// Writes the report in `format` to `path`.
pub fn emit_report(report: &Report, format: ReportFormat, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, report.render(format))
        .map_err(|e| HarnessError::Io { path: path.display().to_string(), msg: e.to_string() })
}
