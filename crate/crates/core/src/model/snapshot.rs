use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ActivityRecord, DataCategory, Platform};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Json,
    Csv,
    Txt,
    Html,
    /// Media and other payloads, listed by path and size only.
    Other,
}

impl FileFormat {
    pub fn from_path(path: &str) -> FileFormat {
        let ext = path
            .rsplit_once('.')
            .map(|(_, e)| e.to_ascii_lowercase())
            .unwrap_or_default();
        match ext.as_str() {
            "json" => FileFormat::Json,
            "csv" => FileFormat::Csv,
            "txt" => FileFormat::Txt,
            "html" | "htm" => FileFormat::Html,
            _ => FileFormat::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub size: u64,
    pub format: FileFormat,
}

/// The Art. 15(1) information items a DDP may carry as free text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisclosureKind {
    Purpose,
    Recipients,
    Retention,
    Source,
    AutomatedDecisions,
}

impl DisclosureKind {
    pub const ALL: [DisclosureKind; 5] = [
        DisclosureKind::Purpose,
        DisclosureKind::Recipients,
        DisclosureKind::Retention,
        DisclosureKind::Source,
        DisclosureKind::AutomatedDecisions,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DisclosureKind::Purpose => "purpose",
            DisclosureKind::Recipients => "recipients",
            DisclosureKind::Retention => "retention",
            DisclosureKind::Source => "source",
            DisclosureKind::AutomatedDecisions => "automated_decisions",
        }
    }
}

impl fmt::Display for DisclosureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One parsed data download package.
///
/// Records are kept sorted by (category, timestamp, context_id); every
/// constructor and transformation re-establishes that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DdpSnapshot {
    platform: Platform,
    account_alias: String,
    request_time: i64,
    records: Vec<ActivityRecord>,
    file_manifest: Vec<FileEntry>,
    disclosure_texts: BTreeMap<DisclosureKind, Option<String>>,
}

impl DdpSnapshot {
    /// Validates and normalizes a snapshot.
    ///
    /// Fails when a record references a file missing from the manifest or
    /// carries a non-positive timestamp.
    pub fn new(
        platform: Platform,
        account_alias: impl Into<String>,
        request_time: i64,
        mut records: Vec<ActivityRecord>,
        mut file_manifest: Vec<FileEntry>,
        disclosure_texts: BTreeMap<DisclosureKind, Option<String>>,
    ) -> Result<Self> {
        file_manifest.sort_by(|a, b| a.path.cmp(&b.path));
        file_manifest.dedup_by(|a, b| a.path == b.path);
        {
            let paths: BTreeSet<&str> = file_manifest.iter().map(|f| f.path.as_str()).collect();
            for r in &records {
                if !paths.contains(r.source_file.as_str()) {
                    return Err(Error::Invalid(format!(
                        "record source file `{}` is not in the file manifest",
                        r.source_file
                    )));
                }
                if r.timestamp.is_some_and(|t| t <= 0) {
                    return Err(Error::Invalid(format!(
                        "non-positive timestamp in `{}`",
                        r.source_file
                    )));
                }
            }
        }
        records.sort_by(ActivityRecord::sort_cmp);
        let mut texts: BTreeMap<DisclosureKind, Option<String>> =
            DisclosureKind::ALL.iter().map(|k| (*k, None)).collect();
        texts.extend(disclosure_texts);
        Ok(DdpSnapshot {
            platform,
            account_alias: account_alias.into(),
            request_time,
            records,
            file_manifest,
            disclosure_texts: texts,
        })
    }

    pub fn platform(&self) -> Platform {
        self.platform
    }

    pub fn account_alias(&self) -> &str {
        &self.account_alias
    }

    pub fn request_time(&self) -> i64 {
        self.request_time
    }

    pub fn records(&self) -> &[ActivityRecord] {
        &self.records
    }

    pub fn file_manifest(&self) -> &[FileEntry] {
        &self.file_manifest
    }

    pub fn disclosure_texts(&self) -> &BTreeMap<DisclosureKind, Option<String>> {
        &self.disclosure_texts
    }

    pub fn disclosure(&self, kind: DisclosureKind) -> Option<&str> {
        self.disclosure_texts.get(&kind).and_then(|t| t.as_deref())
    }

    pub fn records_of(&self, category: DataCategory) -> impl Iterator<Item = &ActivityRecord> {
        self.records.iter().filter(move |r| r.category == category)
    }

    pub fn categories(&self) -> BTreeSet<DataCategory> {
        self.records.iter().map(|r| r.category).collect()
    }

    /// Records dated after the request time. These are tolerated and
    /// reported rather than rejected.
    pub fn future_dated(&self) -> Vec<&ActivityRecord> {
        self.records
            .iter()
            .filter(|r| r.timestamp.is_some_and(|t| t > self.request_time))
            .collect()
    }

    /// Builds a new snapshot with replaced records, keeping everything else.
    pub fn with_records(&self, records: Vec<ActivityRecord>) -> Result<Self> {
        DdpSnapshot::new(
            self.platform,
            self.account_alias.clone(),
            self.request_time,
            records,
            self.file_manifest.clone(),
            self.disclosure_texts.clone(),
        )
    }

    pub fn with_disclosure(&self, kind: DisclosureKind, text: Option<String>) -> Self {
        let mut s = self.clone();
        s.disclosure_texts.insert(kind, text);
        s
    }

    pub fn with_alias(&self, alias: impl Into<String>) -> Self {
        let mut s = self.clone();
        s.account_alias = alias.into();
        s
    }
}

/// Relabels every record of a component category to `target`.
///
/// Used where a platform splits one activity history across files, e.g.
/// browse history assembled from ads, posts and videos viewed.
pub fn merge_categories(
    snapshot: &DdpSnapshot,
    components: &[DataCategory],
    target: DataCategory,
) -> Result<DdpSnapshot> {
    if components.is_empty() {
        return Err(Error::Config(
            "merge_categories needs at least one component category".into(),
        ));
    }
    let records = snapshot
        .records()
        .iter()
        .cloned()
        .map(|mut r| {
            if components.contains(&r.category) {
                r.category = target;
            }
            r
        })
        .collect();
    snapshot.with_records(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(paths: &[&str]) -> Vec<FileEntry> {
        paths
            .iter()
            .map(|p| FileEntry {
                path: p.to_string(),
                size: 1,
                format: FileFormat::from_path(p),
            })
            .collect()
    }

    fn rec(category: DataCategory, ts: i64, ctx: &str) -> ActivityRecord {
        ActivityRecord::new(Platform::Instagram, category, Some(ts), ctx, "a.json")
    }

    fn snapshot(records: Vec<ActivityRecord>) -> DdpSnapshot {
        DdpSnapshot::new(
            Platform::Instagram,
            "alias-1",
            10_000,
            records,
            manifest(&["a.json"]),
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn records_are_sorted_and_disclosures_complete() {
        let s = snapshot(vec![
            rec(DataCategory::Like, 5, "b"),
            rec(DataCategory::Watch, 9, "a"),
            rec(DataCategory::Watch, 3, "z"),
        ]);
        let order: Vec<_> = s.records().iter().map(|r| (r.category, r.timestamp)).collect();
        assert_eq!(
            order,
            vec![
                (DataCategory::Watch, Some(3)),
                (DataCategory::Watch, Some(9)),
                (DataCategory::Like, Some(5)),
            ]
        );
        assert_eq!(s.disclosure_texts().len(), 5);
        assert!(s.disclosure_texts().values().all(Option::is_none));
    }

    #[test]
    fn unknown_source_file_is_rejected() {
        let mut r = rec(DataCategory::Watch, 3, "z");
        r.source_file = "missing.json".into();
        let err = DdpSnapshot::new(
            Platform::Tiktok,
            "a",
            1,
            vec![r],
            manifest(&["a.json"]),
            BTreeMap::new(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn future_dated_records_are_surfaced_not_rejected() {
        let s = snapshot(vec![rec(DataCategory::Watch, 20_000, "x")]);
        assert_eq!(s.future_dated().len(), 1);
    }

    #[test]
    fn merge_preserves_count_and_is_idempotent() {
        let mut records = Vec::new();
        for i in 0..3 {
            records.push(rec(DataCategory::AdsViewed, 100 + i, "ad"));
        }
        for i in 0..5 {
            records.push(rec(DataCategory::Watch, 200 + i, "post"));
        }
        for i in 0..2 {
            records.push(rec(DataCategory::Watch, 300 + i, "video"));
        }
        records.push(rec(DataCategory::Like, 50, "liked"));
        let s = snapshot(records);
        let merged =
            merge_categories(&s, &[DataCategory::AdsViewed, DataCategory::Watch], DataCategory::Watch)
                .unwrap();
        assert_eq!(merged.records_of(DataCategory::Watch).count(), 10);
        assert_eq!(merged.records_of(DataCategory::Like).count(), 1);
        assert_eq!(merged.records().len(), s.records().len());
        let twice = merge_categories(
            &merged,
            &[DataCategory::AdsViewed, DataCategory::Watch],
            DataCategory::Watch,
        )
        .unwrap();
        assert_eq!(twice, merged);
        assert!(merged
            .records()
            .windows(2)
            .all(|w| w[0].sort_cmp(&w[1]).is_le()));
    }

    #[test]
    fn empty_component_list_is_rejected() {
        let s = snapshot(vec![]);
        assert!(merge_categories(&s, &[], DataCategory::Watch)
            .unwrap_err()
            .is_config());
    }
}
