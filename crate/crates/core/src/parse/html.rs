//! Record extraction from machine-generated HTML exports.
//!
//! Markup is parsed with a forgiving html5 tree builder; scripts are never
//! executed. Each element matched by the record selector is one record, and
//! each cell selector yields one key of that record.

use std::collections::BTreeMap;

use scraper::{ElementRef, Html, Selector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtmlSelector {
    /// CSS selector bounding one record block.
    pub record: String,
    /// Key -> CSS selector relative to the block. A trailing `@attr` reads
    /// that attribute instead of the text content.
    pub cells: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HtmlTable {
    pub records: Vec<BTreeMap<String, String>>,
    pub warnings: Vec<String>,
}

struct Cell {
    key: String,
    selector: Selector,
    attr: Option<String>,
}

fn compile(css: &str) -> Result<Selector> {
    Selector::parse(css).map_err(|e| Error::Config(format!("bad CSS selector `{css}`: {e}")))
}

impl HtmlSelector {
    fn compile_cells(&self) -> Result<Vec<Cell>> {
        self.cells
            .iter()
            .map(|(key, spec)| {
                let (css, attr) = match spec.rsplit_once('@') {
                    Some((css, attr)) if !attr.contains(|c: char| c == ' ' || c == ']') => {
                        (css, Some(attr.to_string()))
                    }
                    _ => (spec.as_str(), None),
                };
                Ok(Cell {
                    key: key.clone(),
                    selector: compile(css)?,
                    attr,
                })
            })
            .collect()
    }

    /// Checks that every selector compiles.
    pub fn validate(&self) -> Result<()> {
        compile(&self.record)?;
        self.compile_cells().map(|_| ())
    }
}

/// Concatenated descendant text with whitespace runs collapsed.
pub fn flatten_text(el: ElementRef<'_>) -> String {
    let joined: String = el.text().collect();
    joined.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn parse_html_tables(html: &str, spec: &HtmlSelector) -> Result<HtmlTable> {
    let record_sel = compile(&spec.record)?;
    let cells = spec.compile_cells()?;
    let doc = Html::parse_document(html);
    let mut table = HtmlTable::default();
    for (i, block) in doc.select(&record_sel).enumerate() {
        let mut rec = BTreeMap::new();
        for cell in &cells {
            let Some(el) = block.select(&cell.selector).next() else {
                continue;
            };
            let value = match &cell.attr {
                Some(a) => el.value().attr(a).map(|v| v.trim().to_string()),
                None => Some(flatten_text(el)),
            };
            if let Some(v) = value.filter(|v| !v.is_empty()) {
                rec.insert(cell.key.clone(), v);
            }
        }
        for cell in &cells {
            if !rec.contains_key(&cell.key) {
                table
                    .warnings
                    .push(format!("block {i}: cell `{}` not found", cell.key));
            }
        }
        table.records.push(rec);
    }
    if table.records.is_empty() {
        table
            .warnings
            .push(format!("selector `{}` matched no record blocks", spec.record));
    }
    Ok(table)
}
