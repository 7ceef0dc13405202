use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CompletenessReport, DurationStats, JaccardScores, MatchConfig, RetentionReport};
use crate::error::{Error, Result};

pub const AUDIT_REPORT_SCHEMA_VERSION: u32 = 1;

/// Combined output of a reliability audit. Sections that were not computed
/// are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: u32,
    /// Wall-clock time of the run; the only non-deterministic field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_config: Option<MatchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completeness: Option<CompletenessReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jaccard: Option<JaccardScores>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retention: Option<RetentionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub durations: Option<DurationStats>,
}

impl Default for AuditReport {
    fn default() -> Self {
        AuditReport {
            schema_version: AUDIT_REPORT_SCHEMA_VERSION,
            generated_at: None,
            match_config: None,
            completeness: None,
            jaccard: None,
            retention: None,
            durations: None,
        }
    }
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: AuditReport = serde_json::from_str(text).map_err(|e| Error::json("audit report", e))?;
        if r.schema_version != AUDIT_REPORT_SCHEMA_VERSION {
            return Err(Error::Invalid(format!("audit report schema_version {} unsupported", r.schema_version)));
        }
        Ok(r)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
