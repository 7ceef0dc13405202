//! DDP parsing: directory trees or zip archives in, [`DdpSnapshot`] out.

mod archive;
mod detect;
mod formats;
pub mod html;
pub mod manifest;
pub mod timestamp;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

pub use archive::{open_input, DdpInput};
pub use detect::{detect_platform, list_files, signature_score};
pub use formats::{resolve, value_to_string};
pub use html::{parse_html_tables, HtmlSelector, HtmlTable};
pub use manifest::{FieldMapping, ManifestEntry, MappingMode, ParserManifest, RecordFilter};

use self::manifest::{compile_glob, compile_regex};
use self::timestamp::{parse_timestamp, parse_timezone};
use crate::error::{Error, Result};
use crate::model::{
    ActivityRecord, AttributeRegistry, DataCategory, DdpSnapshot, DisclosureKind, FileEntry,
    FileFormat, TIMESTAMP_ORIGINAL,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseWarning {
    pub file: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.file {
            Some(file) => write!(f, "{file}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// A matched file that could not be read as its declared format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileError {
    pub file: String,
    pub message: String,
}

/// Per (entry, file) accounting so that no record disappears silently.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntryStats {
    pub glob: String,
    pub category: DataCategory,
    pub file: String,
    pub raw_records: usize,
    pub filtered_out: usize,
    pub emitted: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub snapshot: DdpSnapshot,
    pub warnings: Vec<ParseWarning>,
    pub errors: Vec<FileError>,
    pub stats: Vec<EntryStats>,
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Request time of the DDP; defaults to the newest record timestamp.
    pub request_time: Option<i64>,
    pub registry: AttributeRegistry,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            request_time: None,
            registry: AttributeRegistry::builtin(),
        }
    }
}

pub fn parse_ddp(root: &Path, manifest: &ParserManifest, account_alias: &str) -> Result<ParseOutcome> {
    parse_ddp_with(root, manifest, account_alias, &ParseOptions::default())
}

pub fn parse_ddp_with(
    root: &Path,
    manifest: &ParserManifest,
    account_alias: &str,
    options: &ParseOptions,
) -> Result<ParseOutcome> {
    manifest.validate()?;
    let files = list_files(root)?;
    let entry_globs = manifest
        .entries
        .iter()
        .map(|e| compile_glob(&e.glob))
        .collect::<Result<Vec<_>>>()?;
    let disclosure_globs = manifest
        .disclosure_files
        .iter()
        .map(|d| Ok((compile_glob(&d.glob)?, d.kind)))
        .collect::<Result<Vec<_>>>()?;

    let mut file_manifest = Vec::with_capacity(files.len());
    for rel in &files {
        let path = root.join(rel);
        let size = std::fs::metadata(&path).map_err(|e| Error::io(&path, e))?.len();
        file_manifest.push(FileEntry {
            path: rel.clone(),
            size,
            format: FileFormat::from_path(rel),
        });
    }

    let mut tasks = Vec::new();
    let mut unmatched = Vec::new();
    let mut disclosures: BTreeMap<DisclosureKind, Vec<String>> = BTreeMap::new();
    let mut matched_files = 0usize;
    for rel in &files {
        let mut matched = false;
        for (i, g) in entry_globs.iter().enumerate() {
            if g.is_match(rel) {
                tasks.push((rel.clone(), i));
                matched = true;
            }
        }
        for (g, kind) in &disclosure_globs {
            if g.is_match(rel) {
                let path = root.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                disclosures.entry(*kind).or_default().push(text.trim().to_string());
                matched = true;
            }
        }
        if matched {
            matched_files += 1;
        } else {
            unmatched.push(rel.clone());
        }
    }
    if matched_files == 0 {
        return Err(Error::NotADdp(format!(
            "no file under {} matches the {} manifest",
            root.display(),
            manifest.platform
        )));
    }

    let results: Vec<FileResult> = tasks
        .par_iter()
        .map(|(rel, i)| parse_file(root, rel, &manifest.entries[*i], manifest, &options.registry))
        .collect();

    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut errors = Vec::new();
    let mut stats = Vec::new();
    for r in results {
        records.extend(r.records);
        warnings.extend(r.warnings);
        if let Some(e) = r.error {
            errors.push(e);
        }
        stats.push(r.stats);
    }
    if !unmatched.is_empty() {
        warnings.push(ParseWarning {
            file: None,
            message: format!(
                "{} file(s) not covered by the manifest: {}",
                unmatched.len(),
                unmatched.join(", ")
            ),
        });
    }

    let request_time = options
        .request_time
        .unwrap_or_else(|| records.iter().filter_map(|r| r.timestamp).max().unwrap_or(0));
    let disclosure_texts = disclosures
        .into_iter()
        .map(|(k, v)| {
            let text = v.into_iter().filter(|t| !t.is_empty()).collect::<Vec<_>>().join("\n\n");
            (k, Some(text).filter(|t| !t.is_empty()))
        })
        .collect();
    let snapshot = DdpSnapshot::new(
        manifest.platform,
        account_alias,
        request_time,
        records,
        file_manifest,
        disclosure_texts,
    )?;
    for r in snapshot.future_dated() {
        warnings.push(ParseWarning {
            file: Some(r.source_file.clone()),
            message: format!("{} record dated after the request time", r.category),
        });
    }
    Ok(ParseOutcome {
        snapshot,
        warnings,
        errors,
        stats,
    })
}

struct FileResult {
    records: Vec<ActivityRecord>,
    warnings: Vec<ParseWarning>,
    error: Option<FileError>,
    stats: EntryStats,
}

fn load_raw(path: &Path, entry: &ManifestEntry) -> std::result::Result<(Vec<Value>, Vec<String>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    match entry.format {
        FileFormat::Json => {
            let doc: Value = serde_json::from_str(&text).map_err(|e| format!("malformed JSON: {e}"))?;
            Ok((formats::json_records(&doc, entry.record_path.as_deref())?, vec![]))
        }
        FileFormat::Csv => Ok((formats::csv_records(&text).map_err(|e| format!("malformed CSV: {e}"))?, vec![])),
        FileFormat::Txt => Ok((formats::txt_records(&text), vec![])),
        FileFormat::Html => {
            let sel = entry.html.as_ref().expect("validated");
            let table = parse_html_tables(&text, sel).map_err(|e| e.to_string())?;
            let recs = table
                .records
                .into_iter()
                .map(|m| Value::Object(m.into_iter().map(|(k, v)| (k, Value::String(v))).collect()))
                .collect();
            Ok((recs, table.warnings))
        }
        FileFormat::Other => Err("unparseable format".into()),
    }
}

fn parse_file(
    root: &Path,
    rel: &str,
    entry: &ManifestEntry,
    manifest: &ParserManifest,
    registry: &AttributeRegistry,
) -> FileResult {
    let mut out = FileResult {
        records: Vec::new(),
        warnings: Vec::new(),
        error: None,
        stats: EntryStats {
            glob: entry.glob.clone(),
            category: entry.category,
            file: rel.to_string(),
            raw_records: 0,
            filtered_out: 0,
            emitted: 0,
            dropped: 0,
        },
    };
    let warn = |msg: String| ParseWarning {
        file: Some(rel.to_string()),
        message: msg,
    };
    let raws = match load_raw(&root.join(rel), entry) {
        Ok((raws, html_warnings)) => {
            out.warnings.extend(html_warnings.into_iter().map(warn));
            raws
        }
        Err(message) => {
            out.error = Some(FileError {
                file: rel.to_string(),
                message,
            });
            return out;
        }
    };
    out.stats.raw_records = raws.len();
    let builder = RecordBuilder::new(entry, manifest, registry);
    for (i, raw) in raws.iter().enumerate() {
        if !builder.passes_filter(raw) {
            out.stats.filtered_out += 1;
            continue;
        }
        match builder.build(raw, rel) {
            Ok((record, notes)) => {
                out.warnings.extend(notes.into_iter().map(|n| warn(format!("record {i}: {n}"))));
                out.records.push(record);
                out.stats.emitted += 1;
            }
            Err(reason) => {
                out.warnings.push(warn(format!("record {i} dropped: {reason}")));
                out.stats.dropped += 1;
            }
        }
    }
    out
}

struct RecordBuilder<'a> {
    entry: &'a ManifestEntry,
    manifest: &'a ParserManifest,
    registry: &'a AttributeRegistry,
    patterns: Vec<Option<regex::Regex>>,
    consumed: Vec<String>,
}

impl<'a> RecordBuilder<'a> {
    fn new(entry: &'a ManifestEntry, manifest: &'a ParserManifest, registry: &'a AttributeRegistry) -> Self {
        let patterns = entry
            .fields
            .iter()
            .map(|f| f.pattern.as_deref().map(|p| compile_regex(p).expect("validated")))
            .collect();
        let mut consumed: Vec<String> = entry
            .fields
            .iter()
            .filter_map(|f| f.source.as_deref())
            .chain(entry.filter.as_ref().map(|f| f.field.as_str()))
            .map(|s| s.split('.').next().unwrap_or(s).to_string())
            .collect();
        consumed.sort();
        consumed.dedup();
        RecordBuilder {
            entry,
            manifest,
            registry,
            patterns,
            consumed,
        }
    }

    fn passes_filter(&self, raw: &Value) -> bool {
        let Some(f) = &self.entry.filter else {
            return true;
        };
        let value = resolve(raw, &f.field).filter(|v| !v.is_null());
        let text = value.and_then(value_to_string);
        if let Some(want) = f.exists {
            if value.is_some() != want {
                return false;
            }
        }
        if let Some(eq) = &f.equals {
            if text.as_deref() != Some(eq.as_str()) {
                return false;
            }
        }
        if let Some(ne) = &f.not_equals {
            if text.as_deref() == Some(ne.as_str()) {
                return false;
            }
        }
        true
    }

    fn build(&self, raw: &Value, rel: &str) -> std::result::Result<(ActivityRecord, Vec<String>), String> {
        let category = self.entry.category;
        let mut notes = Vec::new();
        let mut record = ActivityRecord::new(self.manifest.platform, category, None, "", rel);
        let tz = parse_timezone(&self.entry.timezone).expect("validated");
        let ts_format = self.entry.timestamp_format();

        for (mapping, pattern) in self.entry.fields.iter().zip(&self.patterns) {
            let found = mapping
                .source
                .as_deref()
                .and_then(|s| resolve(raw, s))
                .filter(|v| !v.is_null());
            let value = match mapping.mode {
                MappingMode::Exists => Some(found.is_some().to_string()),
                MappingMode::Presence => found.map(|_| "present".to_string()),
                MappingMode::Text => found
                    .and_then(value_to_string)
                    .or_else(|| mapping.constant.clone()),
            };
            let value = match (value, pattern) {
                (Some(v), Some(re)) => match re.captures(&v).and_then(|c| c.get(1)) {
                    Some(m) => Some(m.as_str().to_string()),
                    None => {
                        notes.push(format!("`{}` did not match pattern for {}", v, mapping.target));
                        None
                    }
                },
                (v, _) => v,
            };
            let Some(value) = value.map(|v| v.trim().to_string()).filter(|v| !v.is_empty()) else {
                continue;
            };
            if mapping.target == "timestamp" {
                let fmt = ts_format.as_ref().expect("validated");
                match parse_timestamp(&value, fmt, tz) {
                    Some(t) if t > 0 => record.timestamp = Some(t),
                    _ => notes.push(format!("unparseable timestamp `{value}`")),
                }
                record.attributes.insert(TIMESTAMP_ORIGINAL.to_string(), value);
            } else {
                let key = self.registry.canonical_key(category, &mapping.target);
                record.attributes.insert(key, value);
            }
        }

        if let Value::Object(map) = raw {
            for (k, v) in map {
                if self.consumed.iter().any(|c| c == k) {
                    continue;
                }
                if let (false, Some(s)) = (v.is_object() || v.is_array(), value_to_string(v)) {
                    record.attributes.entry(format!("raw.{k}")).or_insert(s);
                }
            }
        }

        if let Some(ctx) = &self.entry.context {
            let key = self.registry.canonical_key(category, ctx);
            record.context_id = record.attributes.get(&key).cloned().unwrap_or_default();
        }
        if record.context_id.is_empty() && category.requires_context() {
            return Err(format!(
                "no `{}` value for context",
                self.entry.context.as_deref().unwrap_or("?")
            ));
        }
        if record.timestamp.is_none() && category.requires_timestamp() {
            notes.push("missing timestamp".to_string());
        }
        Ok((record, notes))
    }
}
