use serde::{Deserialize, Serialize};

use super::{synth_pair, DefectSpec, SyntheticPair};
use crate::error::Result;
use crate::model::Platform;
use crate::reliability::{DateGranularity, JaccardScores, MatchConfig};
use crate::truth::EventKind;

/// A seeded synthetic pair whose watch-history Jaccard scores are known.
/// The seeds were found with the `search_reference_seeds` example and
/// checked against an independent oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePair {
    pub name: String,
    pub platform: Platform,
    pub n_events: usize,
    pub defects: DefectSpec,
    pub config: MatchConfig,
    pub expected: JaccardScores,
}

impl ReferencePair {
    pub fn generate(&self) -> Result<SyntheticPair> {
        synth_pair(self.n_events, &self.defects, self.platform)
    }
}

pub fn reference_pairs() -> Vec<ReferencePair> {
    vec![
        ReferencePair {
            name: "tiktok".into(),
            platform: Platform::Tiktok,
            n_events: 200,
            defects: DefectSpec::none(1),
            config: MatchConfig::for_platform_kind(Platform::Tiktok, EventKind::Watch),
            expected: JaccardScores {
                date: 1.0,
                context: 1.0,
                overall: 1.0,
            },
        },
        ReferencePair {
            name: "youtube".into(),
            platform: Platform::Youtube,
            n_events: 600,
            defects: DefectSpec {
                drop_rate: 0.005,
                jitter_seconds: 3,
                ..DefectSpec::none(32)
            },
            config: MatchConfig::for_platform_kind(Platform::Youtube, EventKind::Watch),
            expected: JaccardScores {
                date: 1.0,
                context: 0.9983,
                overall: 0.995,
            },
        },
        // author-keyed views with clock skew just past a minute and a few
        // renamed accounts; needs minute buckets since day buckets cannot
        // separate anything here
        ReferencePair {
            name: "instagram".into(),
            platform: Platform::Instagram,
            n_events: 600,
            defects: DefectSpec {
                jitter_seconds: 62,
                relabel_rate: 0.015,
                ..DefectSpec::none(7)
            },
            config: MatchConfig::for_platform_kind(Platform::Instagram, EventKind::Watch)
                .with_granularity(DateGranularity::Minute),
            expected: JaccardScores {
                date: 0.96,
                context: 0.97,
                overall: 0.91,
            },
        },
    ]
}
