//! Synthetic ground truth with precisely injected defects.
//!
//! Everything here is a pure function of its spec and seed, and emits the
//! same types as real inputs so downstream code cannot tell them apart.

mod cohort;
mod reference;
mod retention;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use cohort::{synth_cohort, CohortOutput, CohortSpec, DurationMode};
pub use reference::{reference_pairs, ReferencePair};
pub use retention::{synth_retention_pair, RetentionPair, RetentionSpec};

use crate::error::{Error, Result};
use crate::model::{ActivityRecord, DataCategory, DdpSnapshot, FileEntry, FileFormat, Platform};
use crate::truth::{EventKind, EventOrigin, SessionEvent, SessionLog};

/// 2024-11-01T00:00:00Z, the first synthetic day.
pub const SYNTH_EPOCH: i64 = 1_730_419_200;
pub(crate) const SYNTH_FILE: &str = "synthetic/watch_history.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectSpec {
    #[serde(default)]
    pub drop_rate: f64,
    #[serde(default)]
    pub jitter_seconds: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncate_window_days: Option<f64>,
    /// Fraction of distinct context ids renamed in the DDP.
    #[serde(default)]
    pub relabel_rate: f64,
    #[serde(default)]
    pub reorder: bool,
    #[serde(default)]
    pub seed: u64,
}

impl DefectSpec {
    pub fn none(seed: u64) -> Self {
        DefectSpec {
            drop_rate: 0.0,
            jitter_seconds: 0,
            truncate_window_days: None,
            relabel_rate: 0.0,
            reorder: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be in [0, 1], got {v}")))
            }
        };
        unit("drop_rate", self.drop_rate)?;
        unit("relabel_rate", self.relabel_rate)?;
        if let Some(w) = self.truncate_window_days {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Config(format!("truncate_window_days must be >= 0, got {w}")));
            }
        }
        Ok(())
    }
}

/// How synthetic content ids are drawn for a platform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthProfile {
    /// Probability that an event re-watches an earlier id.
    pub rewatch_probability: f64,
    /// When set, contexts are author handles drawn from a pool of
    /// `ceil(n * ratio)` authors instead of per-video ids.
    pub author_pool_ratio: Option<f64>,
}

impl SynthProfile {
    pub fn for_platform(platform: Platform) -> Self {
        match platform {
            Platform::Youtube => SynthProfile {
                rewatch_probability: 0.1,
                author_pool_ratio: None,
            },
            Platform::Instagram => SynthProfile {
                rewatch_probability: 0.0,
                author_pool_ratio: Some(1.0 / 3.0),
            },
            Platform::Tiktok | Platform::Generic => SynthProfile {
                rewatch_probability: 0.0,
                author_pool_ratio: None,
            },
        }
    }

    /// Attribute that carries the context in generated DDP records.
    pub fn context_attribute(&self) -> &'static str {
        if self.author_pool_ratio.is_some() {
            "author_id"
        } else {
            "content_id"
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fate {
    Kept,
    Truncated,
    Dropped,
}

/// What happened to one log event on its way into the DDP.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventFate {
    pub index: usize,
    pub log_timestamp: i64,
    pub log_context: String,
    pub fate: Fate,
    pub jitter: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ddp_timestamp: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ddp_context: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectedTruth {
    pub seed: u64,
    pub n_events: usize,
    pub truncated: usize,
    pub dropped: usize,
    /// Old context -> new context.
    pub relabeled: BTreeMap<String, String>,
    pub reordered: bool,
    pub events: Vec<EventFate>,
}

impl InjectedTruth {
    /// Events missing from the DDP for any reason.
    pub fn removed(&self) -> usize {
        self.truncated + self.dropped
    }

    pub fn realized_drop_fraction(&self) -> f64 {
        if self.n_events == 0 {
            0.0
        } else {
            self.removed() as f64 / self.n_events as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticPair {
    pub log: SessionLog,
    pub ddp: DdpSnapshot,
    pub truth: InjectedTruth,
}

fn video_id(rng: &mut ChaCha8Rng, platform: Platform, i: usize) -> String {
    match platform {
        Platform::Youtube => {
            const ALPHABET: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
            // index prefix keeps ids unique
            let tail: String = (0..6).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char).collect();
            format!("y{i:04}{tail}")
        }
        _ => format!("74{i:06}{:011}", rng.gen_range(0..100_000_000_000u64)),
    }
}

/// Generated watch events: (timestamp, context, watch duration).
fn generate_events(rng: &mut ChaCha8Rng, n: usize, platform: Platform, profile: &SynthProfile) -> Vec<(i64, String, u32)> {
    let authors: Vec<String> = match profile.author_pool_ratio {
        Some(ratio) => {
            let size = ((n as f64 * ratio).ceil() as usize).max(1);
            (0..size).map(|a| format!("author_{a:04}")).collect()
        }
        None => Vec::new(),
    };
    let mut out: Vec<(i64, String, u32)> = Vec::with_capacity(n);
    let mut day = 0i64;
    while out.len() < n {
        let len = rng.gen_range(20..=25).min(n - out.len());
        let mut t = SYNTH_EPOCH + day * 86_400 + 18 * 3600 + rng.gen_range(0..3600);
        for _ in 0..len {
            let dur = rng.gen_range(15..=60u32);
            let ctx = if !authors.is_empty() {
                authors[rng.gen_range(0..authors.len())].clone()
            } else if !out.is_empty() && rng.gen_bool(profile.rewatch_probability) {
                out[rng.gen_range(0..out.len())].1.clone()
            } else {
                video_id(rng, platform, out.len())
            };
            out.push((t, ctx, dur));
            t += i64::from(dur);
        }
        day += 1;
    }
    out
}

pub fn synth_pair(n_events: usize, defects: &DefectSpec, platform: Platform) -> Result<SyntheticPair> {
    synth_pair_with(n_events, defects, platform, &SynthProfile::for_platform(platform))
}

/// Generates a session log and a DDP derived from it. Defects apply in the
/// fixed order truncate, drop, relabel, jitter, reorder.
pub fn synth_pair_with(
    n_events: usize,
    defects: &DefectSpec,
    platform: Platform,
    profile: &SynthProfile,
) -> Result<SyntheticPair> {
    if n_events == 0 {
        return Err(Error::Config("n_events must be at least 1".into()));
    }
    defects.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(defects.seed);
    let generated = generate_events(&mut rng, n_events, platform, profile);

    let events: Vec<SessionEvent> = generated
        .iter()
        .map(|(t, ctx, dur)| SessionEvent {
            kind: EventKind::Watch,
            timestamp: *t,
            content_id: ctx.clone(),
            watch_duration: Some(*dur),
            origin: EventOrigin::Synthetic,
        })
        .collect();
    let first = generated[0].0;
    let (last_t, _, last_d) = generated.last().expect("n >= 1");
    let window = (first, last_t + i64::from(*last_d));
    let request_time = window.1 + 86_400;
    let log = SessionLog::new(platform, format!("synthetic-{}", defects.seed), window, events)?;

    let mut fates: Vec<EventFate> = generated
        .iter()
        .enumerate()
        .map(|(i, (t, ctx, _))| EventFate {
            index: i,
            log_timestamp: *t,
            log_context: ctx.clone(),
            fate: Fate::Kept,
            jitter: 0,
            ddp_timestamp: None,
            ddp_context: None,
        })
        .collect();

    // truncate
    let mut truncated = 0;
    if let Some(days) = defects.truncate_window_days {
        let cutoff = request_time - (days * 86_400.0).round() as i64;
        for f in fates.iter_mut().filter(|f| f.log_timestamp < cutoff) {
            f.fate = Fate::Truncated;
            truncated += 1;
        }
    }

    // drop: exactly round(rate * n), capped by what truncation left
    let kept: Vec<usize> = fates.iter().filter(|f| f.fate == Fate::Kept).map(|f| f.index).collect();
    let n_drop = ((defects.drop_rate * n_events as f64).round() as usize).min(kept.len());
    for pos in index::sample(&mut rng, kept.len(), n_drop) {
        fates[kept[pos]].fate = Fate::Dropped;
    }

    // relabel whole contexts, as a username change would
    let distinct: Vec<String> = fates
        .iter()
        .filter(|f| f.fate == Fate::Kept)
        .map(|f| f.log_context.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n_relabel = (defects.relabel_rate * distinct.len() as f64).round() as usize;
    let mut relabeled = BTreeMap::new();
    for pos in index::sample(&mut rng, distinct.len(), n_relabel) {
        let old = &distinct[pos];
        relabeled.insert(old.clone(), format!("{old}.renamed"));
    }

    // jitter
    let j = i64::from(defects.jitter_seconds);
    for f in fates.iter_mut().filter(|f| f.fate == Fate::Kept) {
        f.jitter = if j > 0 { rng.gen_range(-j..=j) } else { 0 };
        f.ddp_timestamp = Some((f.log_timestamp + f.jitter).max(1));
        f.ddp_context = Some(relabeled.get(&f.log_context).cloned().unwrap_or_else(|| f.log_context.clone()));
    }

    let attr = profile.context_attribute();
    let mut records: Vec<ActivityRecord> = fates
        .iter()
        .filter(|f| f.fate == Fate::Kept)
        .map(|f| {
            let ctx = f.ddp_context.clone().expect("kept events carry a context");
            ActivityRecord::new(platform, DataCategory::Watch, f.ddp_timestamp, ctx.clone(), SYNTH_FILE).with_attr(attr, ctx)
        })
        .collect();
    if defects.reorder {
        records.shuffle(&mut rng);
    }
    let size = records.len() as u64 * 96;
    let ddp = DdpSnapshot::new(
        platform,
        format!("synthetic-{}", defects.seed),
        request_time,
        records,
        vec![FileEntry {
            path: SYNTH_FILE.to_string(),
            size,
            format: FileFormat::Json,
        }],
        BTreeMap::new(),
    )?;
    let dropped = fates.iter().filter(|f| f.fate == Fate::Dropped).count();
    Ok(SyntheticPair {
        log,
        ddp,
        truth: InjectedTruth {
            seed: defects.seed,
            n_events,
            truncated,
            dropped,
            relabeled,
            reordered: defects.reorder,
            events: fates,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_defects_copy_the_log() {
        let p = synth_pair(120, &DefectSpec::none(7), Platform::Tiktok).unwrap();
        assert_eq!(p.ddp.records().len(), 120);
        let log: Vec<_> = p.log.events.iter().map(|e| (e.timestamp, e.content_id.clone())).collect();
        let ddp: Vec<_> = p.ddp.records().iter().map(|r| (r.timestamp.unwrap(), r.context_id.clone())).collect();
        assert_eq!(log, ddp);
    }

    #[test]
    fn realized_drop_count_is_exact() {
        let spec = DefectSpec {
            drop_rate: 0.005,
            ..DefectSpec::none(3)
        };
        let p = synth_pair(200, &spec, Platform::Youtube).unwrap();
        assert_eq!(p.truth.dropped, 1);
        assert_eq!(p.ddp.records().len(), 199);
    }

    #[test]
    fn seed_determinism() {
        let spec = DefectSpec {
            drop_rate: 0.1,
            jitter_seconds: 30,
            relabel_rate: 0.05,
            reorder: true,
            ..DefectSpec::none(11)
        };
        let a = synth_pair(300, &spec, Platform::Instagram).unwrap();
        let b = synth_pair(300, &spec, Platform::Instagram).unwrap();
        assert_eq!(a.ddp, b.ddp);
        assert_eq!(a.log, b.log);
        assert_eq!(a.truth, b.truth);
    }

    #[test]
    fn sessions_have_the_expected_shape() {
        let p = synth_pair(500, &DefectSpec::none(1), Platform::Tiktok).unwrap();
        let mut per_day: BTreeMap<i64, Vec<&SessionEvent>> = BTreeMap::new();
        for e in &p.log.events {
            per_day.entry(e.timestamp.div_euclid(86_400)).or_default().push(e);
        }
        let days: Vec<_> = per_day.values().collect();
        for session in &days[..days.len() - 1] {
            assert!((20..=25).contains(&session.len()));
            for w in session.windows(2) {
                assert!((15..=60).contains(&(w[1].timestamp - w[0].timestamp)));
            }
        }
    }

    #[test]
    fn truncation_removes_old_events_first() {
        let spec = DefectSpec {
            truncate_window_days: Some(3.0),
            ..DefectSpec::none(5)
        };
        let p = synth_pair(200, &spec, Platform::Tiktok).unwrap();
        let cutoff = p.ddp.request_time() - 3 * 86_400;
        assert!(p.truth.truncated > 0);
        assert!(p.ddp.records().iter().all(|r| r.timestamp.unwrap() >= cutoff - 1));
    }

    #[test]
    fn relabel_renames_every_occurrence() {
        let spec = DefectSpec {
            relabel_rate: 0.2,
            ..DefectSpec::none(9)
        };
        let p = synth_pair(150, &spec, Platform::Instagram).unwrap();
        assert!(!p.truth.relabeled.is_empty());
        for old in p.truth.relabeled.keys() {
            assert!(p.ddp.records().iter().all(|r| &r.context_id != old));
        }
    }

    #[test]
    fn bad_rates_are_config_errors() {
        let spec = DefectSpec {
            drop_rate: 1.5,
            ..DefectSpec::none(0)
        };
        assert!(synth_pair(10, &spec, Platform::Tiktok).unwrap_err().is_config());
        assert!(synth_pair(0, &DefectSpec::none(0), Platform::Tiktok).is_err());
    }
}
