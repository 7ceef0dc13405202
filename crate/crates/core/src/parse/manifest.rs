//! Declarative per-platform layout descriptions.

use std::path::Path;

use globset::{Glob, GlobMatcher};
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::html::HtmlSelector;
use super::timestamp::{parse_timezone, TimestampFormat};
use crate::error::{Error, Result};
use crate::model::{DataCategory, DisclosureKind, FileFormat, Platform};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParserManifest {
    pub schema_version: u32,
    pub platform: Platform,
    /// Free-text provenance note, carried into report assumptions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Path globs whose presence identifies the platform.
    #[serde(default)]
    pub signatures: Vec<String>,
    #[serde(default)]
    pub disclosure_files: Vec<DisclosureFile>,
    #[serde(default)]
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisclosureFile {
    pub glob: String,
    pub kind: DisclosureKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub glob: String,
    pub format: FileFormat,
    pub category: DataCategory,
    /// Dotted path to the record array in JSON documents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub html: Option<HtmlSelector>,
    /// Attribute whose value becomes the record's `context_id`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    pub fields: Vec<FieldMapping>,
    /// Minimum fields this layout is known not to provide.
    #[serde(default)]
    pub absent: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_format: Option<String>,
    #[serde(default = "default_timezone")]
    pub timezone: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<RecordFilter>,
}

fn default_timezone() -> String {
    "UTC".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMapping {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// `timestamp` or an attribute name.
    pub target: String,
    #[serde(default)]
    pub mode: MappingMode,
    /// Regex applied to the value; the first capture group is kept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingMode {
    #[default]
    Text,
    /// `"true"` when the source path exists and is non-null, else `"false"`.
    Exists,
    /// Records only that a value was present; the value itself is dropped.
    Presence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordFilter {
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equals: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub not_equals: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exists: Option<bool>,
}

pub(crate) fn compile_glob(glob: &str) -> Result<GlobMatcher> {
    Glob::new(glob)
        .map(|g| g.compile_matcher())
        .map_err(|e| Error::Config(format!("bad glob `{glob}`: {e}")))
}

pub(crate) fn compile_regex(pattern: &str) -> Result<Regex> {
    Regex::new(pattern).map_err(|e| Error::Config(format!("bad pattern `{pattern}`: {e}")))
}

impl ParserManifest {
    pub fn builtin(platform: Platform) -> Self {
        let text = match platform {
            Platform::Tiktok => crate::data::MANIFEST_TIKTOK,
            Platform::Instagram => crate::data::MANIFEST_INSTAGRAM,
            Platform::Youtube => crate::data::MANIFEST_YOUTUBE,
            Platform::Generic => crate::data::MANIFEST_GENERIC,
        };
        Self::from_json(text).expect("builtin manifest is valid")
    }

    pub fn builtins() -> Vec<Self> {
        Platform::ALL.iter().map(|p| Self::builtin(*p)).collect()
    }

    /// Parses and validates a manifest document.
    pub fn from_json(text: &str) -> Result<Self> {
        let m: ParserManifest =
            serde_json::from_str(text).map_err(|e| Error::json("parser manifest", e))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "manifest schema_version {} unsupported (expected {MANIFEST_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        for g in &self.signatures {
            compile_glob(g)?;
        }
        for d in &self.disclosure_files {
            compile_glob(&d.glob)?;
        }
        for e in &self.entries {
            e.validate()?;
        }
        Ok(())
    }
}

impl ManifestEntry {
    fn targets(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|f| f.target.as_str())
    }

    pub fn validate(&self) -> Result<()> {
        let ctx = |msg: String| Error::Config(format!("entry `{}` ({}): {msg}", self.glob, self.category));
        compile_glob(&self.glob)?;
        parse_timezone(&self.timezone)?;
        match (self.format, &self.html) {
            (FileFormat::Html, None) => return Err(ctx("html entries need an `html` selector".into())),
            (FileFormat::Html, Some(h)) => h.validate()?,
            (FileFormat::Other, _) => return Err(ctx("format `other` cannot be parsed".into())),
            _ => {}
        }
        for f in &self.fields {
            if let Some(p) = &f.pattern {
                let re = compile_regex(p)?;
                if re.captures_len() < 2 {
                    return Err(ctx(format!("pattern `{p}` has no capture group")));
                }
            }
            if f.source.is_none() && f.constant.is_none() {
                return Err(ctx(format!("mapping for `{}` has neither source nor constant", f.target)));
            }
        }
        if self.targets().any(|t| t == "timestamp") && self.timestamp_format.is_none() {
            return Err(ctx("timestamp mapped without timestamp_format".into()));
        }
        for required in self.category.min_fields() {
            let mapped = self.targets().any(|t| t == *required);
            let declared_absent = self.absent.iter().any(|a| a == required);
            if !mapped && !declared_absent {
                return Err(ctx(format!(
                    "minimum field `{required}` is neither mapped nor declared absent"
                )));
            }
        }
        if let Some(c) = &self.context {
            if !self.targets().any(|t| t == c) {
                return Err(ctx(format!("context attribute `{c}` is not a mapping target")));
            }
        } else if self.category.requires_context() {
            return Err(ctx("category requires a `context` attribute".into()));
        }
        Ok(())
    }

    pub(crate) fn timestamp_format(&self) -> Option<TimestampFormat> {
        self.timestamp_format.as_deref().map(TimestampFormat::parse_spec)
    }
}
