use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActivityRecord, DataCategory, DdpSnapshot, FileEntry, FileFormat, Platform};

use super::SYNTH_EPOCH;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionSpec {
    #[serde(default = "default_n")]
    pub n_records: usize,
    /// Share of the earlier snapshot's records missing from the later one.
    pub removal_fraction: f64,
    /// Share of the removed records that are ads.
    #[serde(default)]
    pub removed_ad_share: f64,
    #[serde(default = "default_platform")]
    pub platform: Platform,
    #[serde(default = "default_category")]
    pub category: DataCategory,
    #[serde(default)]
    pub seed: u64,
}

fn default_n() -> usize {
    200
}
fn default_platform() -> Platform {
    Platform::Instagram
}
fn default_category() -> DataCategory {
    DataCategory::Watch
}

impl RetentionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_records < 3 {
            return Err(Error::Config("n_records must be at least 3".into()));
        }
        for (name, v) in [("removal_fraction", self.removal_fraction), ("removed_ad_share", self.removed_ad_share)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        if self.removed() > self.n_records - 2 {
            return Err(Error::Config("removal_fraction leaves no interior to remove from".into()));
        }
        Ok(())
    }

    /// Number of records removed between the two snapshots.
    pub fn removed(&self) -> usize {
        (self.removal_fraction * self.n_records as f64).round() as usize
    }

    pub fn removed_ads(&self) -> usize {
        (self.removed_ad_share * self.removed() as f64).round() as usize
    }
}

#[derive(Debug, Clone)]
pub struct RetentionPair {
    pub earlier: DdpSnapshot,
    pub later: DdpSnapshot,
    /// Context ids present in `earlier` but missing from `later`.
    pub removed: Vec<String>,
    pub removed_ads: usize,
}

/// Two snapshots of one account where the later one silently lost records
/// from the middle of the earlier one's window. The first and last records
/// are always kept so the overlap window is the earlier snapshot's window.
pub fn synth_retention_pair(spec: &RetentionSpec) -> Result<RetentionPair> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_records;
    let n_removed = spec.removed();
    let n_removed_ads = spec.removed_ads();
    let n_removed_organic = n_removed - n_removed_ads;

    // Interior positions 1..n-1 split into ads and organic ones, with room
    // for both kinds of removal.
    let interior: Vec<usize> = (1..n - 1).collect();
    let n_ads = (n_removed_ads + (interior.len() - n_removed) / 4).min(interior.len() - n_removed_organic);
    let ad_positions: Vec<usize> = index::sample(&mut rng, interior.len(), n_ads).into_iter().map(|p| interior[p]).collect();
    let mut is_ad = vec![false; n];
    for &p in &ad_positions {
        is_ad[p] = true;
    }
    let organic: Vec<usize> = interior.iter().copied().filter(|&p| !is_ad[p]).collect();

    let mut removed_idx: Vec<usize> = index::sample(&mut rng, ad_positions.len(), n_removed_ads)
        .into_iter()
        .map(|p| ad_positions[p])
        .collect();
    removed_idx.extend(index::sample(&mut rng, organic.len(), n_removed_organic).into_iter().map(|p| organic[p]));
    removed_idx.sort_unstable();

    let file = format!("synthetic/{}.json", spec.category.id());
    let mut t = SYNTH_EPOCH;
    let mut earlier_records = Vec::with_capacity(n);
    for (i, ad) in is_ad.iter().enumerate() {
        t += rng.gen_range(60..=600);
        let ctx = format!("item_{i:05}");
        earlier_records.push(
            ActivityRecord::new(spec.platform, spec.category, Some(t), ctx.clone(), file.clone())
                .with_attr("content_id", ctx)
                .with_attr("is_ad", ad.to_string()),
        );
    }
    let earlier_request = t + 3_600;

    let mut later_records: Vec<ActivityRecord> = earlier_records
        .iter()
        .enumerate()
        .filter(|(i, _)| removed_idx.binary_search(i).is_err())
        .map(|(_, r)| r.clone())
        .collect();
    // activity after the first request only exists in the later snapshot
    let mut t2 = earlier_request;
    for k in 0..20 {
        t2 += rng.gen_range(60..=600);
        let ctx = format!("later_{k:03}");
        later_records.push(
            ActivityRecord::new(spec.platform, spec.category, Some(t2), ctx.clone(), file.clone())
                .with_attr("content_id", ctx)
                .with_attr("is_ad", "false"),
        );
    }

    let removed: Vec<String> = removed_idx.iter().map(|&i| earlier_records[i].context_id.clone()).collect();
    let manifest = |count: usize| {
        vec![FileEntry {
            path: file.clone(),
            size: count as u64 * 96,
            format: FileFormat::Json,
        }]
    };
    let alias = format!("retention-{}", spec.seed);
    let earlier = DdpSnapshot::new(spec.platform, alias.clone(), earlier_request, earlier_records, manifest(n), BTreeMap::new())?;
    let later_len = later_records.len();
    let later = DdpSnapshot::new(spec.platform, alias, t2 + 3_600, later_records, manifest(later_len), BTreeMap::new())?;
    Ok(RetentionPair {
        earlier,
        later,
        removed,
        removed_ads: n_removed_ads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(frac: f64, share: f64) -> RetentionSpec {
        RetentionSpec {
            n_records: 200,
            removal_fraction: frac,
            removed_ad_share: share,
            platform: Platform::Instagram,
            category: DataCategory::Watch,
            seed: 4,
        }
    }

    #[test]
    fn exact_removal_and_ad_share() {
        let p = synth_retention_pair(&spec(0.12, 0.625)).unwrap();
        assert_eq!(p.removed.len(), 24);
        let ads = p
            .earlier
            .records()
            .iter()
            .filter(|r| p.removed.contains(&r.context_id) && r.is_ad())
            .count();
        assert_eq!(ads, 15);
        let later_ids: Vec<&str> = p.later.records().iter().map(|r| r.context_id.as_str()).collect();
        assert!(p.removed.iter().all(|c| !later_ids.contains(&c.as_str())));
    }

    #[test]
    fn endpoints_survive() {
        let p = synth_retention_pair(&spec(0.5, 0.0)).unwrap();
        let first = &p.earlier.records()[0].context_id;
        let last = &p.earlier.records().last().unwrap().context_id;
        assert!(!p.removed.contains(first) && !p.removed.contains(last));
    }

    #[test]
    fn too_much_removal_is_rejected() {
        assert!(synth_retention_pair(&spec(1.0, 0.0)).unwrap_err().is_config());
    }
}
