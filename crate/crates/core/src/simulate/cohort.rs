use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActivityRecord, DataCategory, DdpSnapshot, FileEntry, FileFormat, Platform};

/// 2024-12-01T00:00:00Z, request time of every synthetic cohort member.
const COHORT_REQUEST_TIME: i64 = 1_733_011_200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationMode {
    pub center_days: f64,
    pub weight: f64,
    /// Standard deviation of the normal spread around the center.
    #[serde(default)]
    pub spread_days: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub n_users: usize,
    pub duration_modes: Vec<DurationMode>,
    pub category: DataCategory,
    /// Labels assigned to users in turn (user i gets label i mod len).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country_labels: Option<Vec<String>>,
    /// When set, each user gets an account_details record whose
    /// `created_at` lies this many days (uniform in the range) before the
    /// request time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub account_age_days: Option<(f64, f64)>,
    #[serde(default = "default_platform")]
    pub platform: Platform,
    #[serde(default)]
    pub seed: u64,
    /// Prefix for the generated account aliases.
    #[serde(default = "default_prefix")]
    pub alias_prefix: String,
}

fn default_platform() -> Platform {
    Platform::Tiktok
}

fn default_prefix() -> String {
    "user".to_string()
}

impl CohortSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 {
            return Err(Error::Config("n_users must be positive".into()));
        }
        if self.duration_modes.is_empty() {
            return Err(Error::Config("at least one duration mode is required".into()));
        }
        let total: f64 = self.duration_modes.iter().map(|m| m.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("mode weights must sum to 1, got {total}")));
        }
        for m in &self.duration_modes {
            if !(m.center_days > 0.0) || m.weight < 0.0 || !(m.spread_days >= 0.0) {
                return Err(Error::Config(format!(
                    "invalid mode (center {}, weight {}, spread {})",
                    m.center_days, m.weight, m.spread_days
                )));
            }
        }
        if let Some(labels) = &self.country_labels {
            if labels.is_empty() {
                return Err(Error::Config("country_labels must not be empty when given".into()));
            }
        }
        if let Some((lo, hi)) = self.account_age_days {
            if !(lo >= 0.0 && hi >= lo) {
                return Err(Error::Config(format!("invalid account_age_days range ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CohortOutput {
    pub snapshots: Vec<DdpSnapshot>,
    /// alias -> label, only when the spec carries labels.
    pub labels: BTreeMap<String, String>,
    /// alias -> realized duration in days.
    pub durations: BTreeMap<String, f64>,
}

pub fn synth_cohort(spec: &CohortSpec) -> Result<CohortOutput> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weights = WeightedIndex::new(spec.duration_modes.iter().map(|m| m.weight))
        .map_err(|e| Error::Config(format!("mode weights: {e}")))?;
    let file = format!("synthetic/{}.json", spec.category.id());
    let account_file = "synthetic/account.json".to_string();
    let mut out = CohortOutput {
        snapshots: Vec::with_capacity(spec.n_users),
        labels: BTreeMap::new(),
        durations: BTreeMap::new(),
    };
    let width = spec.n_users.to_string().len().max(3);
    for u in 0..spec.n_users {
        let alias = format!("{}_{u:0width$}", spec.alias_prefix);
        let mode = &spec.duration_modes[weights.sample(&mut rng)];
        let days = if mode.spread_days > 0.0 {
            let normal = Normal::new(mode.center_days, mode.spread_days).expect("spread is positive");
            normal.sample(&mut rng).max(0.0)
        } else {
            mode.center_days
        };
        let span = (days * 86_400.0).round() as i64;
        let latest = COHORT_REQUEST_TIME - rng.gen_range(0..86_400);
        let earliest = latest - span;
        let n_records = rng.gen_range(8..=30usize);
        let mut records = Vec::with_capacity(n_records + 1);
        for k in 0..n_records {
            let t = match k {
                0 => earliest,
                1 => latest,
                _ if span > 0 => rng.gen_range(earliest..=latest),
                _ => earliest,
            };
            let ctx = format!("{alias}-item-{k:03}");
            records.push(
                ActivityRecord::new(spec.platform, spec.category, Some(t), ctx.clone(), file.clone())
                    .with_attr(context_attribute(spec.category), ctx),
            );
        }
        let mut files = vec![FileEntry {
            path: file.clone(),
            size: n_records as u64 * 96,
            format: FileFormat::Json,
        }];
        if let Some((lo, hi)) = spec.account_age_days {
            let age_days = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            let created = (COHORT_REQUEST_TIME - (age_days * 86_400.0).round() as i64).min(earliest);
            let username = format!("synthetic_{alias}");
            records.push(
                ActivityRecord::new(spec.platform, DataCategory::AccountDetails, None, username.clone(), account_file.clone())
                    .with_attr("username", username)
                    .with_attr("created_at", created.to_string()),
            );
            files.push(FileEntry {
                path: account_file.clone(),
                size: 128,
                format: FileFormat::Json,
            });
        }
        if let Some(labels) = &spec.country_labels {
            out.labels.insert(alias.clone(), labels[u % labels.len()].clone());
        }
        out.durations.insert(alias.clone(), span as f64 / 86_400.0);
        out.snapshots.push(DdpSnapshot::new(
            spec.platform,
            alias,
            COHORT_REQUEST_TIME,
            records,
            files,
            BTreeMap::new(),
        )?);
    }
    Ok(out)
}

fn context_attribute(category: DataCategory) -> &'static str {
    match category {
        DataCategory::Search => "query",
        DataCategory::Connections | DataCategory::AccountDetails => "username",
        DataCategory::LinkHistory => "link",
        _ => "content_id",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(modes: Vec<(f64, f64, f64)>) -> CohortSpec {
        CohortSpec {
            n_users: 40,
            duration_modes: modes
                .into_iter()
                .map(|(c, w, s)| DurationMode {
                    center_days: c,
                    weight: w,
                    spread_days: s,
                })
                .collect(),
            category: DataCategory::Watch,
            country_labels: None,
            account_age_days: None,
            platform: Platform::Tiktok,
            seed: 42,
            alias_prefix: "user".into(),
        }
    }

    #[test]
    fn realized_span_equals_reported_duration() {
        let out = synth_cohort(&spec(vec![(6.0, 0.5, 0.5), (13.0, 0.5, 0.5)])).unwrap();
        for s in &out.snapshots {
            let ts: Vec<i64> = s.records_of(DataCategory::Watch).filter_map(|r| r.timestamp).collect();
            let span = ts.iter().max().unwrap() - ts.iter().min().unwrap();
            assert_eq!(span as f64 / 86_400.0, out.durations[s.account_alias()]);
        }
    }

    #[test]
    fn zero_spread_gives_identical_durations() {
        let out = synth_cohort(&spec(vec![(30.0, 1.0, 0.0)])).unwrap();
        assert!(out.durations.values().all(|d| *d == 30.0));
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(synth_cohort(&spec(vec![(6.0, 0.5, 0.5)])).unwrap_err().is_config());
    }

    #[test]
    fn labels_cycle() {
        let mut s = spec(vec![(6.0, 1.0, 0.0)]);
        s.country_labels = Some(vec!["DE".into(), "FR".into()]);
        let out = synth_cohort(&s).unwrap();
        assert_eq!(out.labels["user_000"], "DE");
        assert_eq!(out.labels["user_001"], "FR");
    }
}
