//! Data files shipped with the crate. Every document can be overridden from
//! the command line; these are the defaults.

pub const ATTRIBUTE_REGISTRY: &str = include_str!("../data/attribute_registry.json");

pub const MANIFEST_TIKTOK: &str = include_str!("../data/manifests/tiktok.json");
pub const MANIFEST_INSTAGRAM: &str = include_str!("../data/manifests/instagram.json");
pub const MANIFEST_YOUTUBE: &str = include_str!("../data/manifests/youtube.json");
pub const MANIFEST_GENERIC: &str = include_str!("../data/manifests/generic.json");

pub const HAR_RULES_TIKTOK: &str = include_str!("../data/har_rules/tiktok.json");
pub const HAR_RULES_INSTAGRAM: &str = include_str!("../data/har_rules/instagram.json");
pub const HAR_RULES_YOUTUBE: &str = include_str!("../data/har_rules/youtube.json");

pub const EXPECTATION_MATRIX: &str = include_str!("../data/expectation_matrix.json");

pub const SCRUB_RULES_TIKTOK: &str = include_str!("../data/scrub_rules/tiktok.json");
pub const SCRUB_RULES_INSTAGRAM: &str = include_str!("../data/scrub_rules/instagram.json");
pub const SCRUB_RULES_YOUTUBE: &str = include_str!("../data/scrub_rules/youtube.json");
pub const SCRUB_RULES_GENERIC: &str = include_str!("../data/scrub_rules/generic.json");

pub const KNOWLEDGE_BASE: &str = include_str!("../data/knowledge_base.json");
