use serde::{Deserialize, Serialize};

use crate::model::{DdpSnapshot, DisclosureKind};

pub const EVIDENCE_MAX_CHARS: usize = 200;

/// Art. 15(1) information items checked in every DDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DisclosureClause {
    #[serde(rename = "purpose_15_1_a")]
    Purpose,
    #[serde(rename = "recipients_15_1_c")]
    Recipients,
    #[serde(rename = "retention_15_1_d")]
    Retention,
    #[serde(rename = "source_15_1_g")]
    Source,
    #[serde(rename = "automated_15_1_h")]
    Automated,
}

impl DisclosureClause {
    pub const ALL: [DisclosureClause; 5] = [
        DisclosureClause::Purpose,
        DisclosureClause::Recipients,
        DisclosureClause::Retention,
        DisclosureClause::Source,
        DisclosureClause::Automated,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DisclosureClause::Purpose => "purpose_15_1_a",
            DisclosureClause::Recipients => "recipients_15_1_c",
            DisclosureClause::Retention => "retention_15_1_d",
            DisclosureClause::Source => "source_15_1_g",
            DisclosureClause::Automated => "automated_15_1_h",
        }
    }

    pub fn kind(self) -> DisclosureKind {
        match self {
            DisclosureClause::Purpose => DisclosureKind::Purpose,
            DisclosureClause::Recipients => DisclosureKind::Recipients,
            DisclosureClause::Retention => DisclosureKind::Retention,
            DisclosureClause::Source => DisclosureKind::Source,
            DisclosureClause::Automated => DisclosureKind::AutomatedDecisions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisclosureStatus {
    Disclosed,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisclosureFinding {
    pub clause: DisclosureClause,
    /// `all`, or a category id when a disclosure covers one category only.
    pub scope: String,
    pub status: DisclosureStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<String>,
}

fn excerpt(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed.chars().take(EVIDENCE_MAX_CHARS).collect()
}

/// One finding per clause, in clause order. A clause counts as disclosed
/// when the DDP carries non-blank text for it.
pub fn disclosure_audit(ddp: &DdpSnapshot) -> Vec<DisclosureFinding> {
    DisclosureClause::ALL
        .iter()
        .map(|&clause| {
            let text = ddp.disclosure(clause.kind()).filter(|t| !t.trim().is_empty());
            DisclosureFinding {
                clause,
                scope: "all".to_string(),
                status: if text.is_some() {
                    DisclosureStatus::Disclosed
                } else {
                    DisclosureStatus::Absent
                },
                evidence: text.map(excerpt),
            }
        })
        .collect()
}
