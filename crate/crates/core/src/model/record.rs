use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DataCategory, Platform};

/// Prefix for raw keys that have no canonical attribute name.
pub const RAW_PREFIX: &str = "raw.";

/// Attribute holding the timestamp string exactly as the platform wrote it.
pub const TIMESTAMP_ORIGINAL: &str = "raw.timestamp_original";

/// One normalized user-activity event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityRecord {
    pub platform: Platform,
    pub category: DataCategory,
    /// UTC epoch seconds.
    pub timestamp: Option<i64>,
    pub context_id: String,
    pub attributes: BTreeMap<String, String>,
    /// Path relative to the DDP root, `/`-separated.
    pub source_file: String,
}

impl ActivityRecord {
    pub fn new(
        platform: Platform,
        category: DataCategory,
        timestamp: Option<i64>,
        context_id: impl Into<String>,
        source_file: impl Into<String>,
    ) -> Self {
        ActivityRecord {
            platform,
            category,
            timestamp,
            context_id: context_id.into(),
            attributes: BTreeMap::new(),
            source_file: source_file.into(),
        }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(key.into(), value.into());
        self
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attributes.get(key).map(String::as_str)
    }

    /// True when the named minimum field carries a non-empty value.
    pub fn has_field(&self, field: &str) -> bool {
        if field == "timestamp" {
            return self.timestamp.is_some();
        }
        self.attr(field).is_some_and(|v| !v.trim().is_empty())
    }

    pub fn is_ad(&self) -> bool {
        self.attr("is_ad") == Some("true")
    }

    /// Canonical sort order: category, then timestamp, then context id.
    pub fn sort_cmp(&self, other: &Self) -> Ordering {
        (self.category, self.timestamp, &self.context_id).cmp(&(
            other.category,
            other.timestamp,
            &other.context_id,
        ))
    }
}
