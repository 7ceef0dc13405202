//! Coverage of a DDP against the expectation matrix, the Art. 15(1)
//! disclosure checklist, and retention-window checks.
//!
//! Verdicts follow this table (rows: expected status, columns: observed):
//!
//! | expected | present_complete | present_partial | absent        |
//! |----------|------------------|-----------------|---------------|
//! | Y        | meets            | falls_short     | falls_short   |
//! | N        | exceeds          | meets           | meets         |
//!
//! Nstar, Yg, NA and Dash always give `not_applicable` with a note.

mod disclosure;
mod matrix;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use disclosure::{disclosure_audit, DisclosureClause, DisclosureFinding, DisclosureStatus, EVIDENCE_MAX_CHARS};
pub use matrix::{CellStatus, ExpectationMatrix, MatrixRow, MATRIX_SCHEMA_VERSION};
pub use report::{manifest_assumptions, Assumption, ComplianceReport, COMPLIANCE_REPORT_SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::model::{CategoryGroup, DataCategory, DdpSnapshot, Platform};
use crate::reliability::{duration, Metric};

pub const DEFAULT_FIELD_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observed {
    PresentComplete,
    PresentPartial,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Meets,
    Exceeds,
    FallsShort,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Meets => "meets",
            Verdict::Exceeds => "exceeds",
            Verdict::FallsShort => "falls_short",
            Verdict::NotApplicable => "not_applicable",
        }
    }
}

impl Observed {
    pub fn as_str(self) -> &'static str {
        match self {
            Observed::PresentComplete => "present_complete",
            Observed::PresentPartial => "present_partial",
            Observed::Absent => "absent",
        }
    }
}

/// The verdict table from the module docs.
pub fn verdict(observed: Observed, expected: CellStatus) -> (Verdict, Option<&'static str>) {
    match (expected, observed) {
        (CellStatus::Y, Observed::PresentComplete) => (Verdict::Meets, None),
        (CellStatus::Y, _) => (Verdict::FallsShort, None),
        (CellStatus::N, Observed::PresentComplete) => (Verdict::Exceeds, None),
        (CellStatus::N, _) => (Verdict::Meets, None),
        (CellStatus::Nstar, _) => (Verdict::NotApplicable, Some("visible in the app but not expected in the export")),
        (CellStatus::Yg, _) => (Verdict::NotApplicable, Some("available only in aggregate bundle")),
        (CellStatus::NA, _) => (Verdict::NotApplicable, Some("not applicable to this platform")),
        (CellStatus::Dash, _) => (Verdict::NotApplicable, Some("status not determined; excluded from verdict statistics")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCoverage {
    pub category: DataCategory,
    pub group: CategoryGroup,
    pub expected: CellStatus,
    pub observed: Observed,
    pub record_count: usize,
    /// Share of records populating each minimum field.
    pub field_population: BTreeMap<String, f64>,
    pub missing_fields: Vec<String>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub platform: Platform,
    pub threshold: f64,
    pub matrix_captured_at: String,
    pub categories: Vec<CategoryCoverage>,
}

impl CoverageReport {
    pub fn count(&self, v: Verdict) -> usize {
        self.categories.iter().filter(|c| c.verdict == v).count()
    }

    pub fn get(&self, category: DataCategory) -> Option<&CategoryCoverage> {
        self.categories.iter().find(|c| c.category == category)
    }
}

/// Compares the categories and minimum fields present in `ddp` with the
/// matrix column for its platform. `threshold` is the share of records that
/// must populate a field for it to count as present.
pub fn coverage(ddp: &DdpSnapshot, matrix: &ExpectationMatrix, threshold: f64) -> Result<CoverageReport> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Config(format!("field threshold must be in (0, 1], got {threshold}")));
    }
    let platform = ddp.platform();
    if !matrix.covers(platform) {
        return Err(Error::Config(format!("expectation matrix has no column for {platform}")));
    }
    let mut categories = Vec::with_capacity(matrix.rows.len());
    for row in &matrix.rows {
        let expected = row.cells[&platform];
        let records: Vec<_> = ddp.records_of(row.category).collect();
        let mut field_population = BTreeMap::new();
        let mut missing_fields = Vec::new();
        for field in &row.min_fields {
            let share = if records.is_empty() {
                0.0
            } else {
                records.iter().filter(|r| r.has_field(field)).count() as f64 / records.len() as f64
            };
            if share < threshold {
                missing_fields.push(field.clone());
            }
            field_population.insert(field.clone(), share);
        }
        let observed = if records.is_empty() {
            Observed::Absent
        } else if missing_fields.is_empty() {
            Observed::PresentComplete
        } else {
            Observed::PresentPartial
        };
        let (verdict, note) = verdict(observed, expected);
        categories.push(CategoryCoverage {
            category: row.category,
            group: row.category.group(),
            expected,
            observed,
            record_count: records.len(),
            field_population,
            missing_fields,
            verdict,
            note: note.map(str::to_string),
        });
    }
    Ok(CoverageReport {
        platform,
        threshold,
        matrix_captured_at: matrix.captured_at.clone(),
        categories,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowStatus {
    Within,
    Shorter,
    Longer,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionCheck {
    pub category: DataCategory,
    pub expected_days: f64,
    pub slack_days: f64,
    pub observed_days: Metric,
    pub status: WindowStatus,
}

/// Compares the span of a category's records with an expected retention
/// window of `expected_days ± slack_days`.
pub fn retention_window_check(
    ddp: &DdpSnapshot,
    category: DataCategory,
    expected_days: f64,
    slack_days: f64,
) -> Result<RetentionCheck> {
    if !(expected_days > 0.0) || !(slack_days >= 0.0) {
        return Err(Error::Config(format!(
            "retention check needs expected_days > 0 and slack_days >= 0 (got {expected_days}, {slack_days})"
        )));
    }
    let observed_days = duration(ddp, category);
    let status = match observed_days.value() {
        None => WindowStatus::Unknown,
        Some(d) if d < expected_days - slack_days => WindowStatus::Shorter,
        Some(d) if d > expected_days + slack_days => WindowStatus::Longer,
        Some(_) => WindowStatus::Within,
    };
    Ok(RetentionCheck {
        category,
        expected_days,
        slack_days,
        observed_days,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_table() {
        use CellStatus::*;
        use Observed::*;
        assert_eq!(verdict(PresentComplete, Y).0, Verdict::Meets);
        assert_eq!(verdict(PresentPartial, Y).0, Verdict::FallsShort);
        assert_eq!(verdict(Absent, Y).0, Verdict::FallsShort);
        assert_eq!(verdict(PresentComplete, N).0, Verdict::Exceeds);
        assert_eq!(verdict(PresentPartial, N).0, Verdict::Meets);
        assert_eq!(verdict(Absent, N).0, Verdict::Meets);
        for s in [Nstar, Yg, NA, Dash] {
            for o in [PresentComplete, PresentPartial, Absent] {
                let (v, note) = verdict(o, s);
                assert_eq!(v, Verdict::NotApplicable);
                assert!(note.is_some());
            }
        }
    }
}
