use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Metric;
use crate::error::{Error, Result};
use crate::model::{DataCategory, DdpSnapshot};

const DAY: f64 = 86_400.0;

/// Days between the earliest and latest timestamped record of a category.
pub fn duration(snapshot: &DdpSnapshot, category: DataCategory) -> Metric {
    let mut ts = snapshot.records_of(category).filter_map(|r| r.timestamp);
    let Some(first) = ts.next() else {
        return Metric::undefined(format!("no timestamped {} records", category.id()));
    };
    let (lo, hi) = ts.fold((first, first), |(lo, hi), t| (lo.min(t), hi.max(t)));
    Metric::Defined {
        value: (hi - lo) as f64 / DAY,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center_days: f64,
    pub member_count: usize,
    pub min_days: f64,
    pub max_days: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub users: BTreeMap<String, f64>,
    pub cdf_points: Vec<(f64, f64)>,
    pub clusters: Vec<Cluster>,
}

impl GroupStats {
    fn from_users(users: BTreeMap<String, f64>) -> Self {
        let mut values: Vec<f64> = users.values().copied().collect();
        values.sort_by(f64::total_cmp);
        GroupStats {
            cdf_points: cdf(&values),
            clusters: gap_clusters(&values),
            users,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationStats {
    pub category: DataCategory,
    /// Set when no user passed the filters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub undefined: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_account_age_days: Option<f64>,
    pub users: BTreeMap<String, f64>,
    pub cdf_points: Vec<(f64, f64)>,
    pub clusters: Vec<Cluster>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub groups: BTreeMap<String, GroupStats>,
    /// Users left out, with the reason.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub excluded: BTreeMap<String, String>,
}

impl DurationStats {
    /// `duration_days,cumulative_fraction` rows, plus a group column when
    /// grouped.
    pub fn cdf_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["group", "duration_days", "cumulative_fraction"]).expect("in-memory write");
        let mut emit = |group: &str, points: &[(f64, f64)]| {
            for (d, f) in points {
                w.write_record([group, &d.to_string(), &f.to_string()]).expect("in-memory write");
            }
        };
        emit("all", &self.cdf_points);
        for (label, g) in &self.groups {
            emit(label, &g.cdf_points);
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Empirical CDF over sorted values, one point per distinct value.
fn cdf(sorted: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *v => last.1 = frac,
            _ => out.push((*v, frac)),
        }
    }
    out
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Splits sorted values wherever the gap to the next value exceeds
/// max(2 days, 10% of the total range). Fewer than two values give no
/// clusters.
fn gap_clusters(sorted: &[f64]) -> Vec<Cluster> {
    if sorted.len() < 2 {
        return Vec::new();
    }
    let range = sorted[sorted.len() - 1] - sorted[0];
    let threshold = f64::max(2.0, 0.1 * range);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > threshold {
            let part = &sorted[start..i];
            out.push(Cluster {
                center_days: median(part),
                member_count: part.len(),
                min_days: part[0],
                max_days: part[part.len() - 1],
            });
            start = i;
        }
    }
    out
}

fn parse_created_at(v: &str) -> Option<i64> {
    let v = v.trim();
    v.parse::<i64>()
        .ok()
        .or_else(|| chrono::DateTime::parse_from_rfc3339(v).ok().map(|d| d.timestamp()))
}

/// Account age in days at request time: from a `created_at` attribute on
/// the account details when present, else from the earliest record.
fn account_age_days(s: &DdpSnapshot) -> Option<f64> {
    let created = s
        .records_of(DataCategory::AccountDetails)
        .find_map(|r| r.attr("created_at").and_then(parse_created_at))
        .or_else(|| s.records().iter().filter_map(|r| r.timestamp).min())?;
    Some((s.request_time() - created) as f64 / DAY)
}

/// Per-user durations for one category across a cohort, with an empirical
/// CDF and gap clusters, optionally split by a user -> label map.
pub fn cohort_stats(
    snapshots: &[DdpSnapshot],
    category: DataCategory,
    grouping: Option<&BTreeMap<String, String>>,
    min_account_age_days: Option<f64>,
) -> Result<DurationStats> {
    let mut seen = std::collections::BTreeSet::new();
    for s in snapshots {
        if !seen.insert(s.account_alias()) {
            return Err(Error::Invalid(format!("duplicate account alias `{}` in cohort", s.account_alias())));
        }
    }
    let per_user: Vec<(String, std::result::Result<f64, String>)> = snapshots
        .par_iter()
        .map(|s| {
            let alias = s.account_alias().to_string();
            if let Some(min_age) = min_account_age_days {
                match account_age_days(s) {
                    Some(age) if age >= min_age => {}
                    Some(age) => return (alias, Err(format!("account age {age:.1} d below {min_age} d"))),
                    None => return (alias, Err("account age unknown".to_string())),
                }
            }
            let d = match duration(s, category) {
                Metric::Defined { value } => Ok(value),
                Metric::Undefined { reason } => Err(reason),
            };
            (alias, d)
        })
        .collect();

    let mut users = BTreeMap::new();
    let mut excluded = BTreeMap::new();
    for (alias, d) in per_user {
        match d {
            Ok(v) => {
                users.insert(alias, v);
            }
            Err(reason) => {
                excluded.insert(alias, reason);
            }
        }
    }
    let undefined = users.is_empty().then(|| "no user passed the filters".to_string());
    let mut groups = BTreeMap::new();
    if let Some(labels) = grouping {
        let mut split: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (alias, d) in &users {
            let label = labels.get(alias).cloned().unwrap_or_else(|| "(unlabeled)".to_string());
            split.entry(label).or_default().insert(alias.clone(), *d);
        }
        groups = split.into_iter().map(|(k, v)| (k, GroupStats::from_users(v))).collect();
    }
    let all = GroupStats::from_users(users);
    Ok(DurationStats {
        category,
        undefined,
        min_account_age_days,
        users: all.users,
        cdf_points: all.cdf_points,
        clusters: all.clusters,
        groups,
        excluded,
    })
}
