use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{greedy_match, MatchConfig, Metric};
use crate::error::{Error, Result};
use crate::model::{ActivityRecord, DataCategory, DdpSnapshot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionReport {
    pub category: DataCategory,
    pub date: Metric,
    pub context: Metric,
    pub overall: Metric,
    /// Earlier-snapshot records inside the window with no counterpart later.
    pub missing: Vec<ActivityRecord>,
    /// Share of `missing` flagged as ads.
    pub missing_ad_share: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compared_window: Option<(i64, i64)>,
    /// Earlier records considered (the ratio denominator).
    pub compared: usize,
}

impl RetentionReport {
    fn undefined(category: DataCategory, reason: &str) -> Self {
        RetentionReport {
            category,
            date: Metric::undefined(reason),
            context: Metric::undefined(reason),
            overall: Metric::undefined(reason),
            missing: Vec::new(),
            missing_ad_share: Metric::undefined(reason),
            compared_window: None,
            compared: 0,
        }
    }
}

fn span(s: &DdpSnapshot, category: DataCategory) -> Option<(i64, i64)> {
    let ts = s.records_of(category).filter_map(|r| r.timestamp);
    ts.fold(None, |acc, t| match acc {
        None => Some((t, t)),
        Some((lo, hi)) => Some((lo.min(t), hi.max(t))),
    })
}

/// How much of `earlier` survives in `later`, restricted to the time span
/// both snapshots cover for the category.
///
/// The overall ratio counts earlier records that have a later record with
/// the same context key within the timestamp tolerance; the date and context
/// ratios count retained distinct keys.
pub fn intra_consistency(
    earlier: &DdpSnapshot,
    later: &DdpSnapshot,
    cfg: &MatchConfig,
    category: DataCategory,
) -> Result<RetentionReport> {
    if earlier.platform() != later.platform() {
        return Err(Error::Config("snapshots come from different platforms".into()));
    }
    if earlier.account_alias() != later.account_alias() {
        return Err(Error::Config(format!(
            "snapshots belong to different accounts (`{}` vs `{}`)",
            earlier.account_alias(),
            later.account_alias()
        )));
    }
    let (Some(a), Some(b)) = (span(earlier, category), span(later, category)) else {
        return Ok(RetentionReport::undefined(category, "a snapshot has no timestamped records in this category"));
    };
    let window = (a.0.max(b.0), a.1.min(b.1));
    if window.0 > window.1 {
        return Ok(RetentionReport::undefined(category, "the snapshots cover disjoint time windows"));
    }
    let tol = i64::from(cfg.timestamp_tolerance_seconds);
    let in_window = |r: &&ActivityRecord, slack: i64| r.timestamp.is_some_and(|t| t >= window.0 - slack && t <= window.1 + slack);
    let old: Vec<&ActivityRecord> = earlier.records_of(category).filter(|r| in_window(r, 0)).collect();
    let new: Vec<&ActivityRecord> = later.records_of(category).filter(|r| in_window(r, tol)).collect();

    let key = |r: &ActivityRecord| cfg.context_key.record_key(r).to_string();
    let left: Vec<(i64, String)> = old.iter().map(|r| (r.timestamp.unwrap_or_default(), key(r))).collect();
    let right: Vec<(i64, String, &str)> = new
        .iter()
        .map(|r| (r.timestamp.unwrap_or_default(), key(r), r.context_id.as_str()))
        .collect();
    let l: Vec<(i64, &str)> = left.iter().map(|(t, k)| (*t, k.as_str())).collect();
    let r: Vec<(i64, &str, &str)> = right.iter().map(|(t, k, c)| (*t, k.as_str(), *c)).collect();
    let matches = greedy_match(&l, &r, cfg.timestamp_tolerance_seconds);

    let missing: Vec<ActivityRecord> = old
        .iter()
        .zip(&matches)
        .filter(|(_, m)| m.is_none())
        .map(|(r, _)| (*r).clone())
        .collect();
    let g = cfg.date_granularity;
    let old_dates: BTreeSet<i64> = l.iter().map(|(t, _)| g.bucket(*t)).collect();
    let new_dates: BTreeSet<i64> = r.iter().map(|(t, _, _)| g.bucket(*t)).collect();
    let old_ctx: BTreeSet<&str> = l.iter().map(|(_, k)| *k).collect();
    let new_ctx: BTreeSet<&str> = r.iter().map(|(_, k, _)| *k).collect();

    let ratio = |num: usize, den: usize| {
        if den == 0 {
            Metric::undefined("no earlier records inside the compared window")
        } else {
            Metric::Defined {
                value: num as f64 / den as f64,
            }
        }
    };
    let ads = missing.iter().filter(|r| r.is_ad()).count();
    Ok(RetentionReport {
        category,
        date: ratio(old_dates.intersection(&new_dates).count(), old_dates.len()),
        context: ratio(old_ctx.intersection(&new_ctx).count(), old_ctx.len()),
        overall: ratio(old.len() - missing.len(), old.len()),
        missing_ad_share: if missing.is_empty() {
            Metric::undefined("nothing is missing")
        } else {
            ratio(ads, missing.len())
        },
        missing,
        compared_window: Some(window),
        compared: old.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{synth_retention_pair, RetentionSpec};
    use crate::model::Platform;

    fn spec(frac: f64, share: f64) -> RetentionSpec {
        RetentionSpec {
            n_records: 200,
            removal_fraction: frac,
            removed_ad_share: share,
            platform: Platform::Instagram,
            category: DataCategory::Watch,
            seed: 17,
        }
    }

    #[test]
    fn identical_snapshots_retain_everything() {
        let p = synth_retention_pair(&spec(0.0, 0.0)).unwrap();
        let r = intra_consistency(&p.earlier, &p.earlier, &MatchConfig::default(), DataCategory::Watch).unwrap();
        assert_eq!(r.overall.value(), Some(1.0));
        assert_eq!(r.date.value(), Some(1.0));
        assert!(r.missing.is_empty());
    }

    #[test]
    fn removal_shows_up_as_missing() {
        let p = synth_retention_pair(&spec(0.12, 0.625)).unwrap();
        let r = intra_consistency(&p.earlier, &p.later, &MatchConfig::default(), DataCategory::Watch).unwrap();
        assert_eq!(r.overall.value(), Some(0.88));
        assert_eq!(r.missing.len(), 24);
        assert_eq!(r.missing_ad_share.value(), Some(0.625));
    }

    #[test]
    fn disjoint_windows_are_undefined() {
        let p = synth_retention_pair(&spec(0.0, 0.0)).unwrap();
        let last = p.earlier.records().last().unwrap().timestamp.unwrap();
        let shifted: Vec<_> = p
            .earlier
            .records()
            .iter()
            .cloned()
            .map(|mut r| {
                r.timestamp = r.timestamp.map(|t| t + last);
                r
            })
            .collect();
        let later = p.earlier.with_records(shifted).unwrap();
        let r = intra_consistency(&p.earlier, &later, &MatchConfig::default(), DataCategory::Watch).unwrap();
        assert!(r.overall.value().is_none());
    }
}
