//! Parsing and auditing of social-media data download packages (DDPs).
//!
//! Raw exports are normalized into [`DdpSnapshot`]s by declarative parser
//! manifests, then audited for reliability against ground-truth session logs
//! and for coverage against an expectation matrix.

pub mod bundle;
pub mod compliance;
pub mod data;
pub mod error;
pub mod model;
pub mod parse;
pub mod reliability;
pub mod scrub;
pub mod simulate;
pub mod truth;

pub use error::{Error, Result};
pub use model::{
    merge_categories, ActivityRecord, AttributeRegistry, CanonicalExport, CategoryGroup,
    DataCategory, DdpSnapshot, DisclosureKind, FileEntry, FileFormat, Platform, SnapshotHeader,
    EXPORT_SCHEMA_VERSION, RAW_PREFIX, TIMESTAMP_ORIGINAL,
};
pub use parse::{detect_platform, parse_ddp, parse_ddp_with, ParseOptions, ParseOutcome, ParseWarning, ParserManifest};
pub use reliability::{
    cohort_stats, completeness, correctness, duration, intra_consistency, AuditReport, CompletenessReport, ContextKey,
    DateGranularity, DurationStats, JaccardScores, MatchConfig, Metric, RetentionReport,
};
pub use simulate::{synth_cohort, synth_pair, synth_retention_pair, CohortSpec, DefectSpec, InjectedTruth, SyntheticPair};
pub use truth::{parse_har, EventKind, HarRuleSet, SessionEvent, SessionLog};
pub use compliance::{
    coverage, disclosure_audit, retention_window_check, CellStatus, ComplianceReport, CoverageReport, DisclosureFinding,
    ExpectationMatrix, Observed, Verdict,
};
pub use scrub::{scrub, ScrubReport, ScrubRuleset, Selector, DEFAULT_REDACTION_TOKEN};
pub use bundle::{export_bundle, ExportBundle, KnowledgeBase, BUNDLE_SCHEMA_VERSION, EXPLANATION_UNAVAILABLE};
