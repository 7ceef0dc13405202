//! The export bundle read by the companion dashboard: redacted records,
//! precomputed aggregates and plain-language transparency notes.
//!
//! Every aggregate is computed from the redacted records that ship in the
//! same bundle, so a consumer can recompute any number it displays.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::compliance::ComplianceReport;
use crate::data;
use crate::error::{Error, Result};
use crate::model::{ActivityRecord, CanonicalExport, DataCategory, DdpSnapshot, SnapshotHeader};
use crate::reliability::AuditReport;
use crate::scrub::ScrubRuleset;

pub const BUNDLE_SCHEMA_VERSION: u32 = 1;
pub const KNOWLEDGE_BASE_SCHEMA_VERSION: u32 = 1;
pub const EXPLANATION_UNAVAILABLE: &str = "explanation unavailable";

/// Label used when a record has no usable value for a grouping key.
pub const UNSPECIFIED: &str = "(unspecified)";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeEntry {
    pub purpose: String,
    pub retention: String,
    pub access: String,
    #[serde(default)]
    pub fields: BTreeMap<String, String>,
}

/// Curated, per-category explanations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub categories: BTreeMap<DataCategory, KnowledgeEntry>,
}

impl KnowledgeBase {
    pub fn builtin() -> Self {
        Self::from_json(data::KNOWLEDGE_BASE).expect("shipped knowledge base is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let kb: KnowledgeBase = serde_json::from_str(text).map_err(|e| Error::Config(format!("knowledge base: {e}")))?;
        if kb.schema_version != KNOWLEDGE_BASE_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "knowledge base schema_version {} unsupported (expected {KNOWLEDGE_BASE_SCHEMA_VERSION})",
                kb.schema_version
            )));
        }
        Ok(kb)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyCount {
    pub key: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryAggregates {
    pub record_count: usize,
    /// Records without a timestamp; they appear in no time-based series.
    pub undated: usize,
    /// UTC calendar day to record count.
    pub per_day: BTreeMap<String, usize>,
    /// Records per UTC hour of day.
    pub per_hour: [usize; 24],
    /// All context ids, most frequent first. Complete, so counts add up to
    /// `record_count`.
    pub top_contexts: Vec<KeyCount>,
    /// Records per author (`author_id`, else `author_name`); records
    /// without an author are not listed.
    pub top_authors: Vec<KeyCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceShare {
    pub device: String,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub per_category: BTreeMap<DataCategory, CategoryAggregates>,
    /// Search records per UTC day.
    pub searches_per_day: BTreeMap<String, usize>,
    /// Share of device-bearing records per operating system. A record is
    /// device-bearing when it has an `os` or `device_model` attribute.
    pub device_share: Vec<DeviceShare>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryTransparency {
    pub purpose: String,
    pub retention: String,
    pub access: String,
    /// Explanation per attribute present in this category's records.
    pub fields: BTreeMap<String, String>,
    /// False when any text above is a placeholder.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedactionSummary {
    pub token: String,
    pub attributes: Vec<String>,
    pub redacted_values: usize,
    /// File manifest entries left out because the ruleset removes them.
    pub withheld_files: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportBundle {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub snapshot: SnapshotHeader,
    pub records: Vec<ActivityRecord>,
    pub redaction: RedactionSummary,
    pub aggregates: Aggregates,
    pub transparency: BTreeMap<DataCategory, CategoryTransparency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knowledge_base_note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compliance: Option<ComplianceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliability: Option<AuditReport>,
    pub warnings: Vec<String>,
}

impl ExportBundle {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: ExportBundle = serde_json::from_str(text).map_err(|e| Error::json("export bundle", e))?;
        if b.schema_version != BUNDLE_SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported bundle schema_version {} (expected {BUNDLE_SCHEMA_VERSION})",
                b.schema_version
            )));
        }
        Ok(b)
    }
}

fn day(ts: i64) -> Option<DateTime<Utc>> {
    DateTime::<Utc>::from_timestamp(ts, 0)
}

fn ranked(counts: BTreeMap<String, usize>) -> Vec<KeyCount> {
    let mut v: Vec<KeyCount> = counts.into_iter().map(|(key, count)| KeyCount { key, count }).collect();
    v.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.key.cmp(&b.key)));
    v
}

fn usable<'a>(r: &'a ActivityRecord, key: &str, token: &str) -> Option<&'a str> {
    r.attr(key).map(str::trim).filter(|v| !v.is_empty() && *v != token)
}

fn category_aggregates(records: &[&ActivityRecord], token: &str) -> CategoryAggregates {
    let mut per_day = BTreeMap::new();
    let mut per_hour = [0usize; 24];
    let mut undated = 0;
    let mut contexts = BTreeMap::new();
    let mut authors = BTreeMap::new();
    for r in records {
        match r.timestamp.and_then(day) {
            Some(t) => {
                *per_day.entry(t.format("%Y-%m-%d").to_string()).or_insert(0) += 1;
                per_hour[t.hour() as usize] += 1;
            }
            None => undated += 1,
        }
        let ctx = if r.context_id.is_empty() { UNSPECIFIED } else { r.context_id.as_str() };
        *contexts.entry(ctx.to_string()).or_insert(0) += 1;
        if let Some(a) = usable(r, "author_id", token).or_else(|| usable(r, "author_name", token)) {
            *authors.entry(a.to_string()).or_insert(0) += 1;
        }
    }
    CategoryAggregates {
        record_count: records.len(),
        undated,
        per_day,
        per_hour,
        top_contexts: ranked(contexts),
        top_authors: ranked(authors),
    }
}

/// Aggregates over already-redacted records.
pub fn aggregate(records: &[ActivityRecord], token: &str) -> Aggregates {
    let mut by_cat: BTreeMap<DataCategory, Vec<&ActivityRecord>> = BTreeMap::new();
    for r in records {
        by_cat.entry(r.category).or_default().push(r);
    }
    let per_category: BTreeMap<_, _> = by_cat.iter().map(|(c, rs)| (*c, category_aggregates(rs, token))).collect();
    let searches_per_day = per_category
        .get(&DataCategory::Search)
        .map(|a| a.per_day.clone())
        .unwrap_or_default();

    let mut devices = BTreeMap::new();
    let mut device_records = 0usize;
    for r in records {
        if r.attr("os").is_none() && r.attr("device_model").is_none() {
            continue;
        }
        device_records += 1;
        let os = usable(r, "os", token).unwrap_or(UNSPECIFIED);
        *devices.entry(os.to_string()).or_insert(0) += 1;
    }
    let device_share = ranked(devices)
        .into_iter()
        .map(|k| DeviceShare {
            fraction: k.count as f64 / device_records as f64,
            device: k.key,
            count: k.count,
        })
        .collect();
    Aggregates {
        per_category,
        searches_per_day,
        device_share,
    }
}

/// Builds the bundle for one snapshot. Records are passed through the
/// ruleset's canonical attribute redaction first, and files the ruleset
/// would remove are left out of the file manifest.
pub fn export_bundle(
    ddp: &DdpSnapshot,
    kb: &KnowledgeBase,
    rules: &ScrubRuleset,
    compliance: Option<ComplianceReport>,
    reliability: Option<AuditReport>,
) -> ExportBundle {
    let mut export = CanonicalExport::from_snapshot(ddp);
    let listed = export.snapshot.file_manifest.len();
    export.snapshot.file_manifest.retain(|f| !rules.removes_file(&f.path));
    let withheld_files = listed - export.snapshot.file_manifest.len();
    let mut records = export.records;
    let redacted_values = records.iter_mut().map(|r| rules.redact_record(r)).sum();
    let aggregates = aggregate(&records, &rules.redaction_token);

    let mut warnings = Vec::new();
    let mut transparency = BTreeMap::new();
    for cat in aggregates.per_category.keys() {
        let mut attrs: Vec<&str> = records
            .iter()
            .filter(|r| r.category == *cat)
            .flat_map(|r| r.attributes.keys().map(String::as_str))
            .collect();
        attrs.push("timestamp");
        attrs.sort_unstable();
        attrs.dedup();
        let entry = kb.categories.get(cat);
        if entry.is_none() {
            warnings.push(format!("knowledge base has no entry for {cat}; placeholders used"));
        }
        let mut complete = entry.is_some();
        let fields = attrs
            .into_iter()
            .map(|a| {
                let text = entry.and_then(|e| e.fields.get(a)).cloned();
                if text.is_none() && entry.is_some() {
                    complete = false;
                }
                (a.to_string(), text.unwrap_or_else(|| EXPLANATION_UNAVAILABLE.to_string()))
            })
            .collect();
        let text = |f: fn(&KnowledgeEntry) -> &String| entry.map_or_else(|| EXPLANATION_UNAVAILABLE.to_string(), |e| f(e).clone());
        transparency.insert(
            *cat,
            CategoryTransparency {
                purpose: text(|e| &e.purpose),
                retention: text(|e| &e.retention),
                access: text(|e| &e.access),
                fields,
                complete,
            },
        );
    }

    ExportBundle {
        schema_version: BUNDLE_SCHEMA_VERSION,
        generated_at: None,
        snapshot: export.snapshot,
        records,
        redaction: RedactionSummary {
            token: rules.redaction_token.clone(),
            attributes: rules.canonical_attributes.clone(),
            redacted_values,
            withheld_files,
        },
        aggregates,
        transparency,
        knowledge_base_note: kb.note.clone(),
        compliance,
        reliability,
        warnings,
    }
}
