use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ActivityRecord, DdpSnapshot, DisclosureKind, FileEntry, Platform};
use crate::error::{Error, Result};

pub const EXPORT_SCHEMA_VERSION: u32 = 1;

/// Snapshot metadata as it appears in the canonical export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub platform: Platform,
    pub account_alias: String,
    pub request_time: i64,
    pub file_manifest: Vec<FileEntry>,
    pub disclosure_texts: BTreeMap<DisclosureKind, Option<String>>,
}

/// Versioned JSON envelope shared by the CLI, the simulator and the dashboard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalExport {
    pub schema_version: u32,
    pub snapshot: SnapshotHeader,
    pub records: Vec<ActivityRecord>,
}

impl CanonicalExport {
    pub fn from_snapshot(snapshot: &DdpSnapshot) -> Self {
        CanonicalExport {
            schema_version: EXPORT_SCHEMA_VERSION,
            snapshot: SnapshotHeader {
                platform: snapshot.platform(),
                account_alias: snapshot.account_alias().to_string(),
                request_time: snapshot.request_time(),
                file_manifest: snapshot.file_manifest().to_vec(),
                disclosure_texts: snapshot.disclosure_texts().clone(),
            },
            records: snapshot.records().to_vec(),
        }
    }

    pub fn into_snapshot(self) -> Result<DdpSnapshot> {
        if self.schema_version != EXPORT_SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported export schema_version {} (expected {EXPORT_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let h = self.snapshot;
        DdpSnapshot::new(
            h.platform,
            h.account_alias,
            h.request_time,
            self.records,
            h.file_manifest,
            h.disclosure_texts,
        )
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("export serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("canonical export", e))
    }
}

impl DdpSnapshot {
    pub fn to_export_json(&self) -> String {
        CanonicalExport::from_snapshot(self).to_json()
    }

    pub fn from_export_json(text: &str) -> Result<Self> {
        CanonicalExport::from_json(text)?.into_snapshot()
    }

    pub fn read_export(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CanonicalExport::from_json(&text)
            .map_err(|e| match e {
                Error::Json { source, .. } => Error::json(path.display().to_string(), source),
                other => other,
            })?
            .into_snapshot()
    }

    pub fn write_export(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_export_json()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::model::{DataCategory, FileFormat};

    fn arb_record() -> impl Strategy<Value = ActivityRecord> {
        (
            0usize..DataCategory::ALL.len(),
            proptest::option::of(1i64..2_000_000_000),
            "[a-z0-9]{0,8}",
            proptest::collection::btree_map("[a-z_]{1,6}", "[ -~]{0,10}", 0..4),
            0usize..2,
        )
            .prop_map(|(c, ts, ctx, attrs, f)| ActivityRecord {
                platform: Platform::Tiktok,
                category: DataCategory::ALL[c],
                timestamp: ts,
                context_id: ctx,
                attributes: attrs,
                source_file: ["a/b.txt", "c.json"][f].to_string(),
            })
    }

    proptest! {
        #[test]
        fn export_round_trip(records in proptest::collection::vec(arb_record(), 0..20),
                             purpose in proptest::option::of("[ -~]{1,20}")) {
            let manifest = vec![
                FileEntry { path: "a/b.txt".into(), size: 10, format: FileFormat::Txt },
                FileEntry { path: "c.json".into(), size: 3, format: FileFormat::Json },
            ];
            let mut texts = BTreeMap::new();
            texts.insert(DisclosureKind::Purpose, purpose);
            let s = DdpSnapshot::new(Platform::Tiktok, "u1", 1_700_000_000, records, manifest, texts).unwrap();
            let back = DdpSnapshot::from_export_json(&s.to_export_json()).unwrap();
            prop_assert_eq!(back, s);
        }
    }

    #[test]
    fn envelope_uses_snake_case_field_names() {
        let s = DdpSnapshot::new(Platform::Youtube, "u", 5, vec![], vec![], BTreeMap::new()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s.to_export_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["snapshot"]["platform"], "youtube");
        assert!(v["snapshot"]["disclosure_texts"]["automated_decisions"].is_null());
        assert!(v["records"].as_array().unwrap().is_empty());
    }

    #[test]
    fn wrong_version_is_rejected() {
        let s = DdpSnapshot::new(Platform::Youtube, "u", 5, vec![], vec![], BTreeMap::new()).unwrap();
        let text = s.to_export_json().replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(DdpSnapshot::from_export_json(&text).is_err());
    }
}
