//! Per-category attribute registry, shipped as a data file.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DataCategory, RAW_PREFIX};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeRegistry {
    pub schema_version: u32,
    pub categories: BTreeMap<DataCategory, BTreeSet<String>>,
}

impl AttributeRegistry {
    pub fn builtin() -> Self {
        Self::from_json(crate::data::ATTRIBUTE_REGISTRY).expect("builtin registry parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("attribute registry", e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn allows(&self, category: DataCategory, key: &str) -> bool {
        self.categories
            .get(&category)
            .is_some_and(|keys| keys.contains(key))
    }

    /// Returns `key` if registered for the category, otherwise `raw.<key>`.
    pub fn canonical_key(&self, category: DataCategory, key: &str) -> String {
        if key.starts_with(RAW_PREFIX) || self.allows(category, key) {
            key.to_string()
        } else {
            format!("{RAW_PREFIX}{key}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_covers_every_min_field() {
        let reg = AttributeRegistry::builtin();
        for &c in DataCategory::ALL {
            for f in c.min_fields().iter().filter(|f| **f != "timestamp") {
                assert!(reg.allows(c, f), "{c}: {f} missing from registry");
            }
        }
    }

    #[test]
    fn unknown_keys_get_raw_prefix() {
        let reg = AttributeRegistry::builtin();
        assert_eq!(reg.canonical_key(DataCategory::Watch, "title"), "title");
        assert_eq!(reg.canonical_key(DataCategory::Watch, "header"), "raw.header");
        assert_eq!(reg.canonical_key(DataCategory::Watch, "raw.x"), "raw.x");
    }
}
