//! Reliability metrics: completeness and correctness against a ground-truth
//! session log, retention between two snapshots of one account, and
//! duration statistics across a cohort.

mod cohort;
mod report;
mod retention;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cohort::{cohort_stats, duration, Cluster, DurationStats, GroupStats};
pub use report::{AuditReport, AUDIT_REPORT_SCHEMA_VERSION};
pub use retention::{intra_consistency, RetentionReport};

use crate::error::{Error, Result};
use crate::model::{ActivityRecord, DdpSnapshot, Platform};
use crate::truth::{EventKind, SessionEvent, SessionLog};

/// A metric value that may be undefined (for example a ratio over an empty
/// denominator). Serializes as `{"status": "defined", "value": ..}` or
/// `{"status": "undefined", "reason": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Metric {
    Defined { value: f64 },
    Undefined { reason: String },
}

impl Metric {
    pub fn value(&self) -> Option<f64> {
        match self {
            Metric::Defined { value } => Some(*value),
            Metric::Undefined { .. } => None,
        }
    }

    pub fn undefined(reason: impl Into<String>) -> Self {
        Metric::Undefined { reason: reason.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextKey {
    /// The record's primary context id.
    ContextId,
    ContentId,
    AuthorId,
    Query,
}

impl ContextKey {
    pub fn as_str(self) -> &'static str {
        match self {
            ContextKey::ContextId => "context_id",
            ContextKey::ContentId => "content_id",
            ContextKey::AuthorId => "author_id",
            ContextKey::Query => "query",
        }
    }

    /// Key of a DDP record. Falls back to the context id when the attribute
    /// is missing or empty.
    pub fn record_key(self, r: &ActivityRecord) -> &str {
        match self {
            ContextKey::ContextId => &r.context_id,
            other => match r.attr(other.as_str()) {
                Some(v) if !v.trim().is_empty() => v,
                _ => &r.context_id,
            },
        }
    }
}

impl fmt::Display for ContextKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContextKey {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [ContextKey::ContextId, ContextKey::ContentId, ContextKey::AuthorId, ContextKey::Query]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown context key `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DateGranularity {
    Second,
    Minute,
    Day,
}

impl DateGranularity {
    pub fn as_str(self) -> &'static str {
        match self {
            DateGranularity::Second => "second",
            DateGranularity::Minute => "minute",
            DateGranularity::Day => "day",
        }
    }

    /// Bucket index of a UTC timestamp.
    pub fn bucket(self, ts: i64) -> i64 {
        match self {
            DateGranularity::Second => ts,
            DateGranularity::Minute => ts.div_euclid(60),
            DateGranularity::Day => ts.div_euclid(86_400),
        }
    }
}

impl FromStr for DateGranularity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "second" => Ok(DateGranularity::Second),
            "minute" => Ok(DateGranularity::Minute),
            "day" => Ok(DateGranularity::Day),
            _ => Err(Error::Config(format!("unknown date granularity `{s}` (second, minute or day)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub timestamp_tolerance_seconds: u32,
    pub context_key: ContextKey,
    pub date_granularity: DateGranularity,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            timestamp_tolerance_seconds: 5,
            context_key: ContextKey::ContentId,
            date_granularity: DateGranularity::Day,
        }
    }
}

impl MatchConfig {
    /// Defaults tuned to how each platform records an event kind.
    /// Instagram logs views by author with up to a minute of clock skew.
    pub fn for_platform_kind(platform: Platform, kind: EventKind) -> Self {
        let base = MatchConfig::default();
        match (platform, kind) {
            (_, EventKind::Search) => MatchConfig {
                context_key: ContextKey::Query,
                ..base
            },
            (Platform::Instagram, EventKind::Watch) => MatchConfig {
                timestamp_tolerance_seconds: 60,
                context_key: ContextKey::AuthorId,
                ..base
            },
            _ => base,
        }
    }

    pub fn with_tolerance(mut self, seconds: u32) -> Self {
        self.timestamp_tolerance_seconds = seconds;
        self
    }

    pub fn with_granularity(mut self, g: DateGranularity) -> Self {
        self.date_granularity = g;
        self
    }

    pub fn with_context_key(mut self, k: ContextKey) -> Self {
        self.context_key = k;
        self
    }
}

/// Jaccard index of two sets; two empty sets count as full agreement.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Greedy one-to-one matching between `left` and `right` items, each given
/// as (timestamp, key). Pairs with equal keys and |dt| <= tolerance are
/// accepted in order of |dt|, then right timestamp, then right tiebreak
/// string, then indices. Returns the matched right index for each left item.
pub(crate) fn greedy_match<'a>(
    left: &[(i64, &'a str)],
    right: &[(i64, &'a str, &'a str)],
    tolerance: u32,
) -> Vec<Option<usize>> {
    let tol = i64::from(tolerance);
    let mut by_key: BTreeMap<&str, Vec<(i64, usize)>> = BTreeMap::new();
    for (j, (t, k, _)) in right.iter().enumerate() {
        by_key.entry(k).or_default().push((*t, j));
    }
    for v in by_key.values_mut() {
        v.sort_unstable();
    }
    let mut candidates: Vec<(i64, i64, &str, usize, usize)> = Vec::new();
    for (i, (t, k)) in left.iter().enumerate() {
        let Some(list) = by_key.get(k) else { continue };
        let lo = list.partition_point(|(rt, _)| *rt < t - tol);
        for &(rt, j) in list[lo..].iter().take_while(|(rt, _)| *rt <= t + tol) {
            candidates.push(((rt - t).abs(), rt, right[j].2, j, i));
        }
    }
    candidates.sort_unstable();
    let mut left_match = vec![None; left.len()];
    let mut right_used = vec![false; right.len()];
    for (_, _, _, j, i) in candidates {
        if left_match[i].is_none() && !right_used[j] {
            left_match[i] = Some(j);
            right_used[j] = true;
        }
    }
    left_match
}

/// Log events of one kind matched against the DDP records of the matching
/// category that fall inside the log's capture window (widened by the
/// tolerance).
struct Matching<'a> {
    events: Vec<&'a SessionEvent>,
    records: Vec<&'a ActivityRecord>,
    event_match: Vec<Option<usize>>,
}

fn check_pair(log: &SessionLog, ddp: &DdpSnapshot) -> Result<()> {
    if log.platform != ddp.platform() {
        return Err(Error::Config(format!(
            "session log is for {} but the DDP is from {}",
            log.platform,
            ddp.platform()
        )));
    }
    Ok(())
}

fn match_pair<'a>(log: &'a SessionLog, ddp: &'a DdpSnapshot, cfg: &MatchConfig, kind: EventKind) -> Matching<'a> {
    let tol = i64::from(cfg.timestamp_tolerance_seconds);
    let (start, end) = log.capture_window;
    let events: Vec<&SessionEvent> = log.events_of(kind).collect();
    let records: Vec<&ActivityRecord> = ddp
        .records_of(kind.category())
        .filter(|r| r.timestamp.is_some_and(|t| t >= start - tol && t <= end + tol))
        .collect();
    let left: Vec<(i64, &str)> = events.iter().map(|e| (e.timestamp, e.content_id.as_str())).collect();
    let right: Vec<(i64, &str, &str)> = records
        .iter()
        .map(|r| (r.timestamp.expect("filtered to timestamped"), cfg.context_key.record_key(r), r.context_id.as_str()))
        .collect();
    let event_match = greedy_match(&left, &right, cfg.timestamp_tolerance_seconds);
    Matching {
        events,
        records,
        event_match,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub kind: EventKind,
    pub fraction: Metric,
    pub matched: usize,
    pub total: usize,
    pub unmatched: Vec<SessionEvent>,
}

/// Share of log events that have a DDP record with the same context key
/// within the timestamp tolerance. Each record matches at most one event.
pub fn completeness(log: &SessionLog, ddp: &DdpSnapshot, cfg: &MatchConfig, kind: EventKind) -> Result<CompletenessReport> {
    check_pair(log, ddp)?;
    let m = match_pair(log, ddp, cfg, kind);
    let total = m.events.len();
    let matched = m.event_match.iter().filter(|x| x.is_some()).count();
    let unmatched = m
        .events
        .iter()
        .zip(&m.event_match)
        .filter(|(_, x)| x.is_none())
        .map(|(e, _)| (*e).clone())
        .collect();
    let fraction = if total == 0 {
        Metric::undefined(format!("the session log has no {kind} events"))
    } else {
        Metric::Defined {
            value: matched as f64 / total as f64,
        }
    };
    Ok(CompletenessReport {
        kind,
        fraction,
        matched,
        total,
        unmatched,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JaccardScores {
    pub date: f64,
    pub context: f64,
    pub overall: f64,
}

/// Jaccard similarity between log and DDP on date keys, context keys and
/// (date, context) pairs.
///
/// A DDP record matched to a log event takes that event's timestamp for its
/// date key, so differences within the tolerance do not count against the
/// date aspect. Unmatched records keep their own timestamp.
pub fn correctness(log: &SessionLog, ddp: &DdpSnapshot, cfg: &MatchConfig, kind: EventKind) -> Result<JaccardScores> {
    check_pair(log, ddp)?;
    let m = match_pair(log, ddp, cfg, kind);
    let g = cfg.date_granularity;
    let mut record_ts: Vec<i64> = m.records.iter().map(|r| r.timestamp.expect("timestamped")).collect();
    for (e, x) in m.events.iter().zip(&m.event_match) {
        if let Some(j) = x {
            record_ts[*j] = e.timestamp;
        }
    }
    let log_pairs: BTreeSet<(i64, &str)> = m.events.iter().map(|e| (g.bucket(e.timestamp), e.content_id.as_str())).collect();
    let ddp_pairs: BTreeSet<(i64, &str)> = m
        .records
        .iter()
        .zip(&record_ts)
        .map(|(r, t)| (g.bucket(*t), cfg.context_key.record_key(r)))
        .collect();
    let (log_dates, log_ctx) = project(&log_pairs);
    let (ddp_dates, ddp_ctx) = project(&ddp_pairs);
    Ok(JaccardScores {
        date: jaccard(&log_dates, &ddp_dates),
        context: jaccard(&log_ctx, &ddp_ctx),
        overall: jaccard(&log_pairs, &ddp_pairs),
    })
}

fn project<'a>(pairs: &BTreeSet<(i64, &'a str)>) -> (BTreeSet<i64>, BTreeSet<&'a str>) {
    (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
}
