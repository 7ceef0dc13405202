use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data;
use crate::error::{Error, Result};
use crate::model::{DataCategory, Platform};

pub const MATRIX_SCHEMA_VERSION: u32 = 1;

/// Availability of a category on a platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellStatus {
    /// Present in the export.
    Y,
    /// Not present.
    N,
    /// Visible in the app but not in the export.
    Nstar,
    /// Only in the Google-wide export.
    Yg,
    /// Does not apply to the platform.
    NA,
    /// Not determined.
    Dash,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Y => "Y",
            CellStatus::N => "N",
            CellStatus::Nstar => "Nstar",
            CellStatus::Yg => "Yg",
            CellStatus::NA => "NA",
            CellStatus::Dash => "Dash",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub category: DataCategory,
    pub cells: BTreeMap<Platform, CellStatus>,
    /// Minimum fields as written in the source table.
    #[serde(default)]
    pub min_fields_text: String,
    /// The same fields as canonical attribute names.
    pub min_fields: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationMatrix {
    pub schema_version: u32,
    pub captured_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub rows: Vec<MatrixRow>,
}

impl ExpectationMatrix {
    pub fn builtin() -> Self {
        Self::from_json(data::EXPECTATION_MATRIX).expect("shipped matrix is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: ExpectationMatrix = serde_json::from_str(text).map_err(|e| Error::json("expectation matrix", e))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json { source, .. } => Error::Config(format!("{}: {source}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != MATRIX_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "expectation matrix schema_version {} unsupported (expected {MATRIX_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let mut seen = BTreeSet::new();
        for row in &self.rows {
            if !seen.insert(row.category) {
                return Err(Error::Config(format!("duplicate matrix row for {}", row.category.id())));
            }
        }
        Ok(())
    }

    /// True when every row has a cell for the platform.
    pub fn covers(&self, platform: Platform) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.cells.contains_key(&platform))
    }

    pub fn status(&self, category: DataCategory, platform: Platform) -> Option<CellStatus> {
        self.row(category).and_then(|r| r.cells.get(&platform).copied())
    }

    pub fn row(&self, category: DataCategory) -> Option<&MatrixRow> {
        self.rows.iter().find(|r| r.category == category)
    }

    /// Categories marked `status` for a platform.
    pub fn categories_with(&self, platform: Platform, status: CellStatus) -> BTreeSet<DataCategory> {
        self.rows
            .iter()
            .filter(|r| r.cells.get(&platform) == Some(&status))
            .map(|r| r.category)
            .collect()
    }
}
