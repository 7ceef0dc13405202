//! Rule-based removal of PII keys and files from a raw DDP tree.
//!
//! Scrubbing always writes a copy. Files matched by a file glob are left
//! out; every value reached by a key selector is replaced by the redaction
//! token. Files without redactions are copied byte for byte.

mod selector;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use globset::GlobMatcher;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use selector::Selector;

use crate::data;
use crate::error::{Error, Result};
use crate::model::{ActivityRecord, DataCategory, Platform};
use crate::parse::list_files;
use crate::parse::manifest::compile_glob;
use crate::parse::{parse_ddp, ParserManifest};

pub const SCRUB_RULES_SCHEMA_VERSION: u32 = 1;
pub const SCRUB_REPORT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_REDACTION_TOKEN: &str = "__REDACTED__";

fn default_token() -> String {
    DEFAULT_REDACTION_TOKEN.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScrubRuleset {
    pub schema_version: u32,
    pub platform: Platform,
    #[serde(default = "default_token")]
    pub redaction_token: String,
    /// Files removed entirely.
    #[serde(default)]
    pub file_globs: Vec<String>,
    /// Key selectors whose values are redacted.
    #[serde(default)]
    pub key_paths: Vec<String>,
    /// Categories whose records the rules may touch; all others must keep
    /// their record counts.
    #[serde(default)]
    pub categories: Vec<DataCategory>,
    /// Canonical attributes redacted in exports and bundles.
    #[serde(default)]
    pub canonical_attributes: Vec<String>,
}

impl ScrubRuleset {
    pub fn builtin(platform: Platform) -> Self {
        let text = match platform {
            Platform::Tiktok => data::SCRUB_RULES_TIKTOK,
            Platform::Instagram => data::SCRUB_RULES_INSTAGRAM,
            Platform::Youtube => data::SCRUB_RULES_YOUTUBE,
            Platform::Generic => data::SCRUB_RULES_GENERIC,
        };
        Self::from_json(text).expect("shipped scrub rules are valid")
    }

    /// A ruleset that removes nothing.
    pub fn empty(platform: Platform) -> Self {
        ScrubRuleset {
            schema_version: SCRUB_RULES_SCHEMA_VERSION,
            platform,
            redaction_token: default_token(),
            file_globs: Vec::new(),
            key_paths: Vec::new(),
            categories: Vec::new(),
            canonical_attributes: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: ScrubRuleset = serde_json::from_str(text).map_err(|e| Error::Config(format!("scrub rules: {e}")))?;
        r.validate()?;
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCRUB_RULES_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "scrub rules schema_version {} unsupported (expected {SCRUB_RULES_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.redaction_token.is_empty() {
            return Err(Error::Config("redaction_token must not be empty".into()));
        }
        self.compile().map(|_| ())
    }

    pub fn selectors(&self) -> Result<Vec<Selector>> {
        self.key_paths.iter().map(|k| Selector::parse(k)).collect()
    }

    fn compile(&self) -> Result<(Vec<GlobMatcher>, Vec<Selector>)> {
        let globs = self.file_globs.iter().map(|g| compile_glob(g)).collect::<Result<Vec<_>>>()?;
        Ok((globs, self.selectors()?))
    }

    /// True when a file glob would remove this `/`-separated path.
    pub fn removes_file(&self, rel: &str) -> bool {
        self.file_globs.iter().any(|g| compile_glob(g).is_ok_and(|m| m.is_match(rel)))
    }

    /// Replaces the canonical PII attributes of a record, and their `raw.`
    /// twins. Returns how many values were replaced.
    pub fn redact_record(&self, record: &mut ActivityRecord) -> usize {
        let mut n = 0;
        for attr in &self.canonical_attributes {
            for key in [attr.clone(), format!("{}{attr}", crate::model::RAW_PREFIX)] {
                if let Some(v) = record.attributes.get_mut(&key) {
                    if !v.is_empty() && *v != self.redaction_token {
                        *v = self.redaction_token.clone();
                        n += 1;
                    }
                }
            }
        }
        n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScrubReport {
    pub schema_version: u32,
    pub platform: Platform,
    pub redaction_token: String,
    pub files_scanned: usize,
    pub removed_files: Vec<String>,
    /// Occurrences per key selector, including values already redacted.
    pub redacted_keys: BTreeMap<String, usize>,
    /// Files removed per glob.
    pub file_rule_hits: BTreeMap<String, usize>,
    /// Rules that matched nothing in this tree.
    pub unmatched_rules: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub records_before: BTreeMap<DataCategory, usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub records_after: BTreeMap<DataCategory, usize>,
}

impl ScrubReport {
    pub fn total_redactions(&self) -> usize {
        self.redacted_keys.values().sum()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

struct FileOutcome {
    rel: String,
    removed_by: Option<usize>,
    counts: Vec<usize>,
    warnings: Vec<String>,
    /// Replacement content; `None` copies the original bytes.
    content: Option<Vec<u8>>,
}

struct Ctx<'a> {
    selectors: &'a [Selector],
    /// (selector index, bare key) for selectors usable on flat formats.
    flat: Vec<(usize, &'a str)>,
    token: &'a str,
}

fn check_output(root: &Path, out: &Path) -> Result<()> {
    let root_c = root.canonicalize().map_err(|e| Error::io(root, e))?;
    if out.exists() {
        let out_c = out.canonicalize().map_err(|e| Error::io(out, e))?;
        if out_c == root_c {
            return Err(Error::Config("scrub output must differ from the input tree".into()));
        }
        let non_empty = std::fs::read_dir(out).map_err(|e| Error::io(out, e))?.next().is_some();
        if non_empty {
            return Err(Error::Config(format!("scrub output {} exists and is not empty", out.display())));
        }
    }
    let out_abs = if out.is_absolute() {
        out.to_path_buf()
    } else {
        std::env::current_dir().map_err(|e| Error::io(".", e))?.join(out)
    };
    let mut probe: Option<&Path> = Some(&out_abs);
    while let Some(p) = probe {
        if let Ok(c) = p.canonicalize() {
            if c.starts_with(&root_c) {
                return Err(Error::Config("scrub output must not lie inside the input tree".into()));
            }
            break;
        }
        probe = p.parent();
    }
    Ok(())
}

/// Writes a scrubbed copy of `root` to `out` (which must be absent or
/// empty). With a manifest, record counts per category are reported for
/// both trees.
pub fn scrub(root: &Path, out: &Path, rules: &ScrubRuleset, manifest: Option<&ParserManifest>) -> Result<ScrubReport> {
    rules.validate()?;
    check_output(root, out)?;
    let (globs, selectors) = rules.compile()?;
    let ctx = Ctx {
        selectors: &selectors,
        flat: selectors.iter().enumerate().filter_map(|(i, s)| s.flat_name().map(|n| (i, n))).collect(),
        token: &rules.redaction_token,
    };
    let files = list_files(root)?;

    let outcomes: Vec<FileOutcome> = files
        .par_iter()
        .map(|rel| scrub_file(root, rel, &globs, &ctx))
        .collect::<Result<Vec<_>>>()?;

    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut report = ScrubReport {
        schema_version: SCRUB_REPORT_SCHEMA_VERSION,
        platform: rules.platform,
        redaction_token: rules.redaction_token.clone(),
        files_scanned: files.len(),
        removed_files: Vec::new(),
        redacted_keys: rules.key_paths.iter().map(|k| (k.clone(), 0)).collect(),
        file_rule_hits: rules.file_globs.iter().map(|g| (g.clone(), 0)).collect(),
        unmatched_rules: Vec::new(),
        warnings: Vec::new(),
        records_before: BTreeMap::new(),
        records_after: BTreeMap::new(),
    };
    for o in outcomes {
        if let Some(g) = o.removed_by {
            *report.file_rule_hits.get_mut(&rules.file_globs[g]).expect("glob listed") += 1;
            report.removed_files.push(o.rel);
            continue;
        }
        for (i, c) in o.counts.iter().enumerate() {
            *report.redacted_keys.get_mut(&rules.key_paths[i]).expect("selector listed") += c;
        }
        report.warnings.extend(o.warnings);
        let dest = out.join(&o.rel);
        if let Some(parent) = dest.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        match o.content {
            Some(bytes) => std::fs::write(&dest, bytes).map_err(|e| Error::io(&dest, e))?,
            None => {
                std::fs::copy(root.join(&o.rel), &dest).map_err(|e| Error::io(&dest, e))?;
            }
        }
    }
    for (g, n) in &report.file_rule_hits {
        if *n == 0 {
            report.unmatched_rules.push(format!("file_glob `{g}`"));
        }
    }
    for (k, n) in &report.redacted_keys {
        if *n == 0 {
            report.unmatched_rules.push(format!("key_path `{k}`"));
        }
    }
    if let Some(m) = manifest {
        report.records_before = category_counts(root, m)?;
        report.records_after = category_counts(out, m)?;
    }
    Ok(report)
}

fn category_counts(root: &Path, manifest: &ParserManifest) -> Result<BTreeMap<DataCategory, usize>> {
    let snap = parse_ddp(root, manifest, "scrub")?.snapshot;
    let mut counts = BTreeMap::new();
    for r in snap.records() {
        *counts.entry(r.category).or_insert(0) += 1;
    }
    Ok(counts)
}

fn scrub_file(root: &Path, rel: &str, globs: &[GlobMatcher], ctx: &Ctx<'_>) -> Result<FileOutcome> {
    let mut o = FileOutcome {
        rel: rel.to_string(),
        removed_by: globs.iter().position(|g| g.is_match(rel)),
        counts: vec![0; ctx.selectors.len()],
        warnings: Vec::new(),
        content: None,
    };
    if o.removed_by.is_some() || ctx.selectors.is_empty() {
        return Ok(o);
    }
    let ext = Path::new(rel)
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    if !matches!(ext.as_str(), "json" | "txt" | "csv") {
        return Ok(o);
    }
    let path: PathBuf = root.join(rel);
    let Ok(text) = std::fs::read_to_string(&path) else {
        o.warnings.push(format!("{rel}: not UTF-8, copied unchanged"));
        return Ok(o);
    };
    let changed = match ext.as_str() {
        "json" => scrub_json(&text, rel, ctx, &mut o),
        "txt" => scrub_txt(&text, ctx, &mut o),
        _ => scrub_csv(&text, rel, ctx, &mut o),
    };
    if !changed {
        o.content = None;
    }
    Ok(o)
}

fn scrub_json(text: &str, rel: &str, ctx: &Ctx<'_>, o: &mut FileOutcome) -> bool {
    let Ok(mut doc) = serde_json::from_str::<Value>(text) else {
        o.warnings.push(format!("{rel}: invalid JSON, copied unchanged"));
        return false;
    };
    let mut changed = false;
    let mut path = Vec::new();
    redact_json(&mut doc, &mut path, ctx, o, rel, &mut changed);
    if changed {
        let mut s = if text.contains('\n') {
            serde_json::to_string_pretty(&doc)
        } else {
            serde_json::to_string(&doc)
        }
        .expect("JSON value serializes");
        if text.ends_with('\n') {
            s.push('\n');
        }
        o.content = Some(s.into_bytes());
    }
    changed
}

fn redact_json(v: &mut Value, path: &mut Vec<String>, ctx: &Ctx<'_>, o: &mut FileOutcome, rel: &str, changed: &mut bool) {
    match v {
        Value::Object(map) => {
            for (k, child) in map.iter_mut() {
                path.push(k.clone());
                if let Some(i) = ctx.selectors.iter().position(|s| s.matches(path)) {
                    match child {
                        Value::Null => {}
                        Value::Object(_) | Value::Array(_) => {
                            o.counts[i] += 1;
                            o.warnings.push(format!(
                                "{rel}: `{}` selects a non-scalar at {}; replaced the whole subtree",
                                ctx.selectors[i].as_str(),
                                path.join(".")
                            ));
                            *child = Value::String(ctx.token.to_string());
                            *changed = true;
                        }
                        _ => {
                            o.counts[i] += 1;
                            if child.as_str() != Some(ctx.token) {
                                *child = Value::String(ctx.token.to_string());
                                *changed = true;
                            }
                        }
                    }
                } else {
                    redact_json(child, path, ctx, o, rel, changed);
                }
                path.pop();
            }
        }
        Value::Array(items) => {
            for item in items {
                redact_json(item, path, ctx, o, rel, changed);
            }
        }
        _ => {}
    }
}

fn flat_index(ctx: &Ctx<'_>, key: &str) -> Option<usize> {
    ctx.flat.iter().find(|(_, n)| *n == key).map(|(i, _)| *i)
}

/// `Key: value` lines.
fn scrub_txt(text: &str, ctx: &Ctx<'_>, o: &mut FileOutcome) -> bool {
    if ctx.flat.is_empty() {
        return false;
    }
    let mut out = String::with_capacity(text.len());
    let mut changed = false;
    for line in text.split_inclusive('\n') {
        let body = line.trim_end_matches(['\n', '\r']);
        let ending = &line[body.len()..];
        let hit = body.find(':').and_then(|idx| {
            let i = flat_index(ctx, body[..idx].trim())?;
            let rest = &body[idx + 1..];
            let value = rest.trim();
            (!value.is_empty()).then_some((i, idx, rest.len() - rest.trim_start().len(), value))
        });
        match hit {
            Some((i, idx, pad, value)) => {
                o.counts[i] += 1;
                if value != ctx.token {
                    changed = true;
                }
                out.push_str(&body[..idx + 1 + pad]);
                out.push_str(ctx.token);
                out.push_str(ending);
            }
            None => out.push_str(line),
        }
    }
    if changed {
        o.content = Some(out.into_bytes());
    }
    changed
}

fn scrub_csv(text: &str, rel: &str, ctx: &Ctx<'_>, o: &mut FileOutcome) -> bool {
    if ctx.flat.is_empty() {
        return false;
    }
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let Ok(headers) = reader.headers().cloned() else {
        o.warnings.push(format!("{rel}: unreadable CSV header, copied unchanged"));
        return false;
    };
    let columns: Vec<(usize, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(c, h)| flat_index(ctx, h.trim()).map(|i| (c, i)))
        .collect();
    if columns.is_empty() {
        return false;
    }
    let mut rows = Vec::new();
    let mut changed = false;
    for rec in reader.records() {
        let Ok(rec) = rec else {
            o.warnings.push(format!("{rel}: malformed CSV row, file copied unchanged"));
            o.counts.iter_mut().for_each(|c| *c = 0);
            return false;
        };
        let mut fields: Vec<String> = rec.iter().map(str::to_string).collect();
        for &(c, i) in &columns {
            if let Some(cell) = fields.get_mut(c) {
                if !cell.trim().is_empty() {
                    o.counts[i] += 1;
                    if cell != ctx.token {
                        *cell = ctx.token.to_string();
                        changed = true;
                    }
                }
            }
        }
        rows.push(fields);
    }
    if changed {
        let terminator = if text.contains("\r\n") {
            csv::Terminator::CRLF
        } else {
            csv::Terminator::Any(b'\n')
        };
        let mut w = csv::WriterBuilder::new().flexible(true).terminator(terminator).from_writer(Vec::new());
        w.write_record(&headers).expect("in-memory write");
        for r in &rows {
            w.write_record(r).expect("in-memory write");
        }
        o.content = Some(w.into_inner().expect("in-memory flush"));
    }
    changed
}
