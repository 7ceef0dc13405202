use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{
    CoverageReport, DisclosureFinding, DisclosureStatus, ExpectationMatrix, RetentionCheck, Verdict, WindowStatus,
};
use crate::model::{DdpSnapshot, Platform};
use crate::parse::ParserManifest;
use crate::reliability::{AuditReport, Metric};

pub const COMPLIANCE_REPORT_SCHEMA_VERSION: u32 = 1;

const LABEL: &str = "potential non-compliance indicators";

/// One entry of the assumptions registry printed with every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumption {
    pub key: String,
    pub value: String,
}

impl Assumption {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        Assumption {
            key: key.into(),
            value: value.into(),
        }
    }
}

/// Timezone and provenance notes of the manifest used to parse a DDP.
pub fn manifest_assumptions(manifest: &ParserManifest) -> Vec<Assumption> {
    let mut out = Vec::new();
    let mut zones: Vec<String> = manifest
        .entries
        .iter()
        .map(|e| format!("{} ({})", e.timezone, e.category.id()))
        .collect();
    zones.sort();
    zones.dedup();
    let all_utc = manifest.entries.iter().all(|e| e.timezone == "UTC");
    out.push(Assumption::new(
        "source_timezones",
        if all_utc {
            "UTC for every entry".to_string()
        } else {
            zones.join(", ")
        },
    ));
    if let Some(note) = &manifest.note {
        out.push(Assumption::new("manifest_note", note.clone()));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub schema_version: u32,
    /// Wall-clock time of the run; excluded from determinism checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub platform: Option<Platform>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub account_alias: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_time: Option<i64>,
    pub indicators: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageReport>,
    pub disclosures: Vec<DisclosureFinding>,
    pub retention_checks: Vec<RetentionCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliability: Option<AuditReport>,
    pub assumptions: Vec<Assumption>,
}

impl ComplianceReport {
    /// Assembles a report. Every section is optional; the assumptions list
    /// always starts with the fixed entries (UTC normalization, threshold,
    /// matrix date) followed by `extra`.
    pub fn build(
        ddp: Option<&DdpSnapshot>,
        coverage: Option<CoverageReport>,
        matrix: Option<&ExpectationMatrix>,
        disclosures: Vec<DisclosureFinding>,
        retention_checks: Vec<RetentionCheck>,
        reliability: Option<AuditReport>,
        extra: Vec<Assumption>,
    ) -> Self {
        let mut assumptions = vec![Assumption::new(
            "timestamps",
            "normalized to UTC epoch seconds at parse time",
        )];
        if let Some(c) = &coverage {
            assumptions.push(Assumption::new(
                "field_threshold",
                format!("a minimum field counts as present when populated in at least {}% of records", c.threshold * 100.0),
            ));
        }
        if let Some(m) = matrix {
            assumptions.push(Assumption::new("matrix_captured_at", m.captured_at.clone()));
            if let Some(note) = &m.note {
                assumptions.push(Assumption::new("matrix_note", note.clone()));
            }
        }
        if let Some(cfg) = reliability.as_ref().and_then(|r| r.match_config) {
            assumptions.push(Assumption::new(
                "match_tolerance_seconds",
                cfg.timestamp_tolerance_seconds.to_string(),
            ));
            assumptions.push(Assumption::new("match_context_key", cfg.context_key.as_str()));
            assumptions.push(Assumption::new("date_granularity", cfg.date_granularity.as_str()));
        }
        assumptions.extend(extra);

        let indicators = coverage.as_ref().map_or(0, |c| c.count(Verdict::FallsShort))
            + disclosures.iter().filter(|d| d.status == DisclosureStatus::Absent).count()
            + retention_checks
                .iter()
                .filter(|r| matches!(r.status, WindowStatus::Shorter | WindowStatus::Longer))
                .count();
        ComplianceReport {
            schema_version: COMPLIANCE_REPORT_SCHEMA_VERSION,
            generated_at: None,
            label: LABEL.to_string(),
            platform: ddp.map(|d| d.platform()),
            account_alias: ddp.map(|d| d.account_alias().to_string()),
            request_time: ddp.map(|d| d.request_time()),
            indicators,
            coverage,
            disclosures,
            retention_checks,
            reliability,
            assumptions,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Markdown rendering with a fixed section order. Does not include
    /// `generated_at`, so identical inputs give identical bytes.
    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        let _ = writeln!(md, "# DDP compliance report\n");
        let _ = writeln!(
            md,
            "This report lists {LABEL}. It does not make legal judgments.\n"
        );

        md.push_str("## Subject\n\n");
        match (&self.platform, &self.account_alias) {
            (Some(p), Some(a)) => {
                let _ = writeln!(md, "- Platform: {p}");
                let _ = writeln!(md, "- Account alias: {}", cell(a));
                if let Some(t) = self.request_time {
                    let _ = writeln!(md, "- Request time: {}", iso(t));
                }
                md.push('\n');
            }
            _ => md.push_str("No data.\n\n"),
        }

        md.push_str("## Summary\n\n");
        let _ = writeln!(md, "- Indicators: {}", self.indicators);
        if let Some(c) = &self.coverage {
            let _ = writeln!(
                md,
                "- Coverage verdicts: {} meets, {} exceeds, {} falls short, {} not applicable",
                c.count(Verdict::Meets),
                c.count(Verdict::Exceeds),
                c.count(Verdict::FallsShort),
                c.count(Verdict::NotApplicable)
            );
        }
        let absent = self.disclosures.iter().filter(|d| d.status == DisclosureStatus::Absent).count();
        let _ = writeln!(md, "- Disclosures absent: {absent} of {}\n", self.disclosures.len());

        md.push_str("## Category coverage\n\n");
        match &self.coverage {
            Some(c) if !c.categories.is_empty() => {
                md.push_str("| Group | Category | Expected | Observed | Records | Missing fields | Verdict | Note |\n");
                md.push_str("|---|---|---|---|---|---|---|---|\n");
                for row in &c.categories {
                    let _ = writeln!(
                        md,
                        "| {} | {} | {} | {} | {} | {} | {} | {} |",
                        row.group.as_str(),
                        row.category.id(),
                        row.expected.as_str(),
                        row.observed.as_str(),
                        row.record_count,
                        cell(&row.missing_fields.join(", ")),
                        row.verdict.as_str(),
                        cell(row.note.as_deref().unwrap_or(""))
                    );
                }
                md.push('\n');
            }
            _ => md.push_str("No data.\n\n"),
        }

        md.push_str("## Disclosures\n\n");
        if self.disclosures.is_empty() {
            md.push_str("No data.\n\n");
        } else {
            md.push_str("| Clause | Scope | Status | Evidence |\n|---|---|---|---|\n");
            for d in &self.disclosures {
                let status = match d.status {
                    DisclosureStatus::Disclosed => "disclosed",
                    DisclosureStatus::Absent => "absent",
                };
                let _ = writeln!(
                    md,
                    "| {} | {} | {status} | {} |",
                    d.clause.as_str(),
                    cell(&d.scope),
                    cell(d.evidence.as_deref().unwrap_or(""))
                );
            }
            md.push('\n');
        }

        md.push_str("## Retention window checks\n\n");
        if self.retention_checks.is_empty() {
            md.push_str("No data.\n\n");
        } else {
            md.push_str("| Category | Expected days | Observed days | Status |\n|---|---|---|---|\n");
            for r in &self.retention_checks {
                let status = serde_json::to_value(r.status).expect("status serializes");
                let _ = writeln!(
                    md,
                    "| {} | {} ± {} | {} | {} |",
                    r.category.id(),
                    r.expected_days,
                    r.slack_days,
                    metric(&r.observed_days, 2),
                    status.as_str().unwrap_or_default()
                );
            }
            md.push('\n');
        }

        md.push_str("## Reliability\n\n");
        match &self.reliability {
            Some(r) if r.completeness.is_some() || r.jaccard.is_some() || r.retention.is_some() || r.durations.is_some() => {
                if let Some(c) = &r.completeness {
                    let _ = writeln!(
                        md,
                        "- Completeness ({}): {} ({} of {} events)",
                        c.kind,
                        metric(&c.fraction, 4),
                        c.matched,
                        c.total
                    );
                }
                if let Some(j) = &r.jaccard {
                    let _ = writeln!(
                        md,
                        "- Jaccard: date {:.4}, context {:.4}, overall {:.4}",
                        j.date, j.context, j.overall
                    );
                }
                if let Some(t) = &r.retention {
                    let _ = writeln!(
                        md,
                        "- Retention ({}): overall {}, {} missing",
                        t.category.id(),
                        metric(&t.overall, 4),
                        t.missing.len()
                    );
                }
                if let Some(d) = &r.durations {
                    let _ = writeln!(md, "- Durations: {} users, {} clusters", d.users.len(), d.clusters.len());
                }
                md.push('\n');
            }
            _ => md.push_str("No data.\n\n"),
        }

        md.push_str("## Assumptions\n\n| Key | Value |\n|---|---|\n");
        for a in &self.assumptions {
            let _ = writeln!(md, "| {} | {} |", cell(&a.key), cell(&a.value));
        }
        md
    }
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

fn iso(t: i64) -> String {
    DateTime::<Utc>::from_timestamp(t, 0).map_or_else(|| t.to_string(), |d| d.to_rfc3339())
}

fn metric(m: &Metric, digits: usize) -> String {
    match m {
        Metric::Defined { value } => format!("{value:.digits$}"),
        Metric::Undefined { reason } => format!("undefined ({reason})"),
    }
}
