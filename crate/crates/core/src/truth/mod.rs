//! Ground-truth session logs, extracted from HAR captures or generated by
//! the simulator.

mod har;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use har::{parse_har, parse_har_str, HarExtractionRule, HarOutcome, HarRuleSet, TimestampSource, HAR_RULES_SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::model::{DataCategory, Platform};

pub const SESSION_LOG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Watch,
    Like,
    Search,
}

impl EventKind {
    pub const ALL: &'static [EventKind] = &[EventKind::Watch, EventKind::Like, EventKind::Search];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Watch => "watch",
            EventKind::Like => "like",
            EventKind::Search => "search",
        }
    }

    /// The DDP category holding records of this kind.
    pub fn category(self) -> DataCategory {
        match self {
            EventKind::Watch => DataCategory::Watch,
            EventKind::Like => DataCategory::Like,
            EventKind::Search => DataCategory::Search,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown event kind `{s}` (expected watch, like or search)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventOrigin {
    Har,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub kind: EventKind,
    /// UTC epoch seconds.
    pub timestamp: i64,
    pub content_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watch_duration: Option<u32>,
    pub origin: EventOrigin,
}

/// A ground-truth event sequence. Events are sorted by timestamp (then kind
/// and id) and all fall inside `capture_window`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionLog {
    pub schema_version: u32,
    pub platform: Platform,
    pub session_id: String,
    pub capture_window: (i64, i64),
    pub events: Vec<SessionEvent>,
}

fn event_order(a: &SessionEvent, b: &SessionEvent) -> std::cmp::Ordering {
    (a.timestamp, a.kind, &a.content_id).cmp(&(b.timestamp, b.kind, &b.content_id))
}

impl SessionLog {
    /// Sorts the events and checks the log invariants.
    pub fn new(
        platform: Platform,
        session_id: impl Into<String>,
        capture_window: (i64, i64),
        mut events: Vec<SessionEvent>,
    ) -> Result<Self> {
        events.sort_by(event_order);
        let log = SessionLog {
            schema_version: SESSION_LOG_SCHEMA_VERSION,
            platform,
            session_id: session_id.into(),
            capture_window,
            events,
        };
        log.validate()?;
        Ok(log)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SESSION_LOG_SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "session log schema_version {} unsupported (expected {SESSION_LOG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let (start, end) = self.capture_window;
        if start > end {
            return Err(Error::Invalid("capture window ends before it starts".into()));
        }
        for w in self.events.windows(2) {
            if event_order(&w[0], &w[1]).is_gt() {
                return Err(Error::Invalid("session events are not sorted".into()));
            }
        }
        for e in &self.events {
            if e.timestamp < start || e.timestamp > end {
                return Err(Error::Invalid(format!(
                    "event at {} lies outside the capture window [{start}, {end}]",
                    e.timestamp
                )));
            }
            if e.watch_duration.is_some_and(|d| !(1..=86_400).contains(&d)) {
                return Err(Error::Invalid("watch_duration outside [1, 86400]".into()));
            }
        }
        Ok(())
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &SessionEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events_of(kind).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("session log serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let log: SessionLog = serde_json::from_str(text).map_err(|e| Error::json("session log", e))?;
        log.validate()?;
        Ok(log)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}
