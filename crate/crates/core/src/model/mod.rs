//! Shared vocabulary: platforms, data categories, normalized records and
//! snapshots, plus the canonical export envelope.

mod category;
mod export;
mod platform;
mod record;
pub mod registry;
mod snapshot;

pub use category::{CategoryGroup, DataCategory};
pub use export::{CanonicalExport, SnapshotHeader, EXPORT_SCHEMA_VERSION};
pub use platform::Platform;
pub use record::{ActivityRecord, RAW_PREFIX, TIMESTAMP_ORIGINAL};
pub use registry::AttributeRegistry;
pub use snapshot::{merge_categories, DdpSnapshot, DisclosureKind, FileEntry, FileFormat};
