//! Event extraction from HTTP Archive 1.2 captures.

use std::collections::HashMap;
use std::path::Path;

use chrono::DateTime;
use percent_encoding::percent_decode_str;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{EventKind, EventOrigin, SessionEvent, SessionLog};
use crate::error::{Error, Result};
use crate::model::Platform;
use crate::parse::resolve;

pub const HAR_RULES_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimestampSource {
    #[default]
    RequestStarted,
    ResponseReceived,
}

/// Maps matching requests to session events.
///
/// `id_capture` is either a named group of `url_pattern`, or
/// `request_body:<path>` / `response_body:<path>` for a dotted path into a
/// JSON body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarExtractionRule {
    pub kind: EventKind,
    pub url_pattern: String,
    pub id_capture: String,
    #[serde(default)]
    pub timestamp_source: TimestampSource,
    /// Optional capture (same syntax as `id_capture`) holding a watch duration in seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_capture: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarRuleSet {
    pub schema_version: u32,
    pub platform: Platform,
    #[serde(default = "default_window")]
    pub dedup_window_seconds: u32,
    pub rules: Vec<HarExtractionRule>,
}

fn default_window() -> u32 {
    1
}

#[derive(Debug, Clone)]
enum Capture {
    Group(String),
    RequestBody(String),
    ResponseBody(String),
}

impl Capture {
    fn parse(spec: &str, re: &Regex) -> Result<Capture> {
        if let Some(p) = spec.strip_prefix("request_body:") {
            return Ok(Capture::RequestBody(p.to_string()));
        }
        if let Some(p) = spec.strip_prefix("response_body:") {
            return Ok(Capture::ResponseBody(p.to_string()));
        }
        if re.capture_names().flatten().any(|n| n == spec) {
            Ok(Capture::Group(spec.to_string()))
        } else {
            Err(Error::Config(format!(
                "capture `{spec}` is neither a body path nor a named group of `{}`",
                re.as_str()
            )))
        }
    }
}

struct CompiledRule {
    kind: EventKind,
    re: Regex,
    id: Capture,
    duration: Option<Capture>,
    source: TimestampSource,
}

impl HarRuleSet {
    pub fn builtin(platform: Platform) -> Result<Self> {
        let text = match platform {
            Platform::Tiktok => crate::data::HAR_RULES_TIKTOK,
            Platform::Instagram => crate::data::HAR_RULES_INSTAGRAM,
            Platform::Youtube => crate::data::HAR_RULES_YOUTUBE,
            Platform::Generic => {
                return Err(Error::Config("no builtin HAR rules for the generic platform; pass --rules".into()))
            }
        };
        Self::from_json(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: HarRuleSet = serde_json::from_str(text).map_err(|e| Error::json("HAR rules", e))?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != HAR_RULES_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "HAR rules schema_version {} unsupported (expected {HAR_RULES_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.compile().map(|_| ())
    }

    fn compile(&self) -> Result<Vec<CompiledRule>> {
        self.rules
            .iter()
            .map(|r| {
                let re = Regex::new(&r.url_pattern)
                    .map_err(|e| Error::Config(format!("bad url_pattern `{}`: {e}", r.url_pattern)))?;
                let id = Capture::parse(&r.id_capture, &re)?;
                let duration = r.duration_capture.as_deref().map(|d| Capture::parse(d, &re)).transpose()?;
                Ok(CompiledRule {
                    kind: r.kind,
                    re,
                    id,
                    duration,
                    source: r.timestamp_source,
                })
            })
            .collect()
    }
}

#[derive(Debug, Deserialize)]
struct RawHar {
    log: RawLog,
}

#[derive(Debug, Deserialize)]
struct RawLog {
    entries: Vec<RawEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawEntry {
    started_date_time: String,
    #[serde(default)]
    time: f64,
    request: RawRequest,
    #[serde(default)]
    response: Option<RawResponse>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawRequest {
    url: String,
    #[serde(default)]
    post_data: Option<RawBody>,
}

#[derive(Debug, Deserialize)]
struct RawResponse {
    #[serde(default)]
    content: Option<RawBody>,
}

#[derive(Debug, Deserialize)]
struct RawBody {
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    encoding: Option<String>,
}

#[derive(Debug, Clone)]
pub struct HarOutcome {
    pub log: SessionLog,
    pub warnings: Vec<String>,
    /// Events dropped as retries of an earlier identical event.
    pub duplicates_removed: usize,
    /// Events produced per rule, in rule order (before deduplication).
    pub per_rule: Vec<usize>,
}

pub fn parse_har(path: &Path, rules: &HarRuleSet) -> Result<HarOutcome> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let session_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "session".to_string());
    parse_har_str(&text, rules, &session_id)
}

fn body_value(body: Option<&RawBody>) -> std::result::Result<Value, String> {
    let body = body.ok_or("no body")?;
    if body.encoding.as_deref() == Some("base64") {
        return Err("base64-encoded bodies are not supported".into());
    }
    let text = body.text.as_deref().ok_or("body has no text")?;
    serde_json::from_str(text).map_err(|e| format!("body is not JSON: {e}"))
}

fn extract(cap: &Capture, caps: &regex::Captures<'_>, entry: &RawEntry) -> std::result::Result<String, String> {
    let value = match cap {
        Capture::Group(name) => {
            let m = caps.name(name).ok_or_else(|| format!("group `{name}` did not participate"))?;
            percent_decode_str(m.as_str()).decode_utf8_lossy().into_owned()
        }
        Capture::RequestBody(path) => {
            let doc = body_value(entry.request.post_data.as_ref())?;
            resolve(&doc, path)
                .and_then(crate::parse::value_to_string)
                .ok_or_else(|| format!("request body has no `{path}`"))?
        }
        Capture::ResponseBody(path) => {
            let doc = body_value(entry.response.as_ref().and_then(|r| r.content.as_ref()))?;
            resolve(&doc, path)
                .and_then(crate::parse::value_to_string)
                .ok_or_else(|| format!("response body has no `{path}`"))?
        }
    };
    let value = value.trim().to_string();
    if value.is_empty() {
        Err("empty id".into())
    } else {
        Ok(value)
    }
}

/// Extracts a [`SessionLog`] from HAR text. The output does not depend on
/// the order of `log.entries`.
pub fn parse_har_str(text: &str, rules: &HarRuleSet, session_id: &str) -> Result<HarOutcome> {
    let compiled = rules.compile()?;
    let har: RawHar = serde_json::from_str(text).map_err(|e| Error::InvalidHar(e.to_string()))?;
    let mut warnings = Vec::new();
    let mut per_rule = vec![0usize; compiled.len()];
    let mut window: Option<(i64, i64)> = None;
    // (millis, event)
    let mut found: Vec<(i64, SessionEvent)> = Vec::new();

    for (i, entry) in har.log.entries.iter().enumerate() {
        let started = DateTime::parse_from_rfc3339(&entry.started_date_time)
            .map_err(|e| Error::InvalidHar(format!("entry {i}: bad startedDateTime: {e}")))?
            .timestamp_millis();
        let ended = started + entry.time.max(0.0).round() as i64;
        window = Some(match window {
            None => (started, ended),
            Some((a, b)) => (a.min(started), b.max(ended)),
        });
        let Some((r, rule, caps)) = compiled
            .iter()
            .enumerate()
            .find_map(|(r, rule)| rule.re.captures(&entry.request.url).map(|c| (r, rule, c)))
        else {
            continue;
        };
        let content_id = match extract(&rule.id, &caps, entry) {
            Ok(id) => id,
            Err(why) => {
                warnings.push(format!("entry {i} ({}): id extraction failed: {why}", rule.kind));
                continue;
            }
        };
        let watch_duration = match &rule.duration {
            None => None,
            Some(cap) => match extract(cap, &caps, entry).map(|v| v.parse::<f64>()) {
                Ok(Ok(secs)) if (1.0..=86_400.0).contains(&secs.round()) => Some(secs.round() as u32),
                _ => {
                    warnings.push(format!("entry {i}: unusable watch duration ignored"));
                    None
                }
            },
        };
        let millis = match rule.source {
            TimestampSource::RequestStarted => started,
            TimestampSource::ResponseReceived => ended,
        };
        per_rule[r] += 1;
        found.push((
            millis,
            SessionEvent {
                kind: rule.kind,
                timestamp: millis.div_euclid(1000),
                content_id,
                watch_duration,
                origin: EventOrigin::Har,
            },
        ));
    }

    found.sort_by(|a, b| (a.0, a.1.kind, &a.1.content_id).cmp(&(b.0, b.1.kind, &b.1.content_id)));
    let window_ms = i64::from(rules.dedup_window_seconds) * 1000;
    let mut last_kept: HashMap<(EventKind, String), i64> = HashMap::new();
    let mut events = Vec::with_capacity(found.len());
    let mut duplicates_removed = 0;
    for (ms, ev) in found {
        let key = (ev.kind, ev.content_id.clone());
        match last_kept.get(&key) {
            Some(prev) if ms - prev <= window_ms => duplicates_removed += 1,
            _ => {
                last_kept.insert(key, ms);
                events.push(ev);
            }
        }
    }

    if events.is_empty() {
        warnings.push("no HAR entry matched any extraction rule".to_string());
    }
    let (start, end) = window.map_or((0, 0), |(a, b)| (a.div_euclid(1000), b.div_euclid(1000)));
    let log = SessionLog::new(rules.platform, session_id, (start, end), events)?;
    Ok(HarOutcome {
        log,
        warnings,
        duplicates_removed,
        per_rule,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules() -> HarRuleSet {
        HarRuleSet::from_json(
            r#"{"schema_version":1,"platform":"tiktok","rules":[
              {"kind":"watch","url_pattern":"/item\\?id=(?P<id>[^&]+)","id_capture":"id"},
              {"kind":"like","url_pattern":"/like$","id_capture":"request_body:target.id"}]}"#,
        )
        .unwrap()
    }

    fn entry(started: &str, url: &str, body: Option<&str>) -> Value {
        let mut e = serde_json::json!({
            "startedDateTime": started, "time": 250.0,
            "request": {"method": "GET", "url": url}, "response": {"status": 200}
        });
        if let Some(b) = body {
            e["request"]["postData"] = serde_json::json!({"mimeType": "application/json", "text": b});
        }
        e
    }

    fn har(entries: Vec<Value>) -> String {
        serde_json::json!({"log": {"version": "1.2", "entries": entries}}).to_string()
    }

    #[test]
    fn extracts_group_and_body_ids() {
        let text = har(vec![
            entry("2024-11-05T14:00:00.100Z", "https://x.test/item?id=a%20b", None),
            entry("2024-11-05T14:00:05.000Z", "https://x.test/like", Some(r#"{"target":{"id":"v1"}}"#)),
            entry("2024-11-05T14:00:06.000Z", "https://x.test/static.js", None),
        ]);
        let out = parse_har_str(&text, &rules(), "s").unwrap();
        let ids: Vec<_> = out.log.events.iter().map(|e| e.content_id.as_str()).collect();
        assert_eq!(ids, ["a b", "v1"]);
        assert_eq!(out.log.capture_window, (1730815200, 1730815206));
        assert_eq!(out.per_rule, [1, 1]);
    }

    #[test]
    fn retry_within_window_is_collapsed_but_not_beyond() {
        let text = har(vec![
            entry("2024-11-05T14:00:00.100Z", "https://x.test/item?id=a", None),
            entry("2024-11-05T14:00:00.900Z", "https://x.test/item?id=a", None),
            entry("2024-11-05T14:00:02.500Z", "https://x.test/item?id=a", None),
        ]);
        let out = parse_har_str(&text, &rules(), "s").unwrap();
        assert_eq!(out.log.events.len(), 2);
        assert_eq!(out.duplicates_removed, 1);
    }

    #[test]
    fn failed_body_extraction_warns() {
        let text = har(vec![entry("2024-11-05T14:00:00Z", "https://x.test/like", Some("{}"))]);
        let out = parse_har_str(&text, &rules(), "s").unwrap();
        assert!(out.log.events.is_empty());
        assert!(out.warnings.iter().any(|w| w.contains("id extraction failed")));
        assert!(out.warnings.iter().any(|w| w.contains("no HAR entry matched")));
    }

    #[test]
    fn not_a_har_is_fatal() {
        assert!(matches!(parse_har_str("{\"foo\":1}", &rules(), "s"), Err(Error::InvalidHar(_))));
        assert!(matches!(parse_har_str("nope", &rules(), "s"), Err(Error::InvalidHar(_))));
    }

    #[test]
    fn unknown_group_is_a_config_error() {
        let err = HarRuleSet::from_json(
            r#"{"schema_version":1,"platform":"tiktok","rules":[{"kind":"watch","url_pattern":"id=(?P<id>\\d+)","id_capture":"vid"}]}"#,
        )
        .unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn builtin_rules_validate() {
        for p in Platform::AUDITED {
            HarRuleSet::builtin(p).unwrap();
        }
        assert!(HarRuleSet::builtin(Platform::Generic).unwrap_err().is_config());
    }
}
