//! Raw record extraction for the JSON, CSV and TXT layouts.
//!
//! Every format is lowered to `serde_json::Value` objects so field mappings
//! resolve through a single dotted-path mechanism.

use serde_json::{Map, Value};

/// Resolves a dotted path (`a.b.0.c`); numeric segments index arrays.
pub fn resolve<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    if path.is_empty() {
        return Some(value);
    }
    path.split('.').try_fold(value, |v, seg| match v {
        Value::Object(m) => m.get(seg),
        Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get(i)),
        _ => None,
    })
}

/// Scalar rendering; arrays and objects become compact JSON.
pub fn value_to_string(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        other => Some(other.to_string()),
    }
}

/// Selects the record list of a JSON document. An object at `record_path`
/// is a single record.
pub fn json_records(doc: &Value, record_path: Option<&str>) -> Result<Vec<Value>, String> {
    let path = record_path.unwrap_or("");
    match resolve(doc, path) {
        Some(Value::Array(items)) => Ok(items.clone()),
        Some(obj @ Value::Object(_)) => Ok(vec![obj.clone()]),
        Some(_) => Err(format!("`{path}` is not an array or object")),
        None => Err(format!("record path `{path}` not found")),
    }
}

pub fn csv_records(text: &str) -> Result<Vec<Value>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| e.to_string())?;
        let mut m = Map::new();
        for (h, v) in headers.iter().zip(row.iter()) {
            m.insert(h.to_string(), Value::String(v.to_string()));
        }
        out.push(Value::Object(m));
    }
    Ok(out)
}

/// TXT exports: blank-line separated blocks of `Key: Value` lines.
pub fn txt_records(text: &str) -> Vec<Value> {
    let mut out = Vec::new();
    let mut current = Map::new();
    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(Value::Object(std::mem::take(&mut current)));
            }
            continue;
        }
        if let Some((k, v)) = line.split_once(':') {
            current.insert(k.trim().to_string(), Value::String(v.trim().to_string()));
        }
    }
    if !current.is_empty() {
        out.push(Value::Object(current));
    }
    out
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn resolve_paths() {
        let v = json!({"a": {"b": [{"c": 1}, {"c": 2}]}});
        assert_eq!(resolve(&v, "a.b.1.c"), Some(&json!(2)));
        assert_eq!(resolve(&v, "a.x"), None);
        assert_eq!(resolve(&v, ""), Some(&v));
    }

    #[test]
    fn txt_blocks_split_on_first_colon() {
        let text = "Date: 2024-10-01 12:00:00\nLink: https://x/1/\n\nDate: 2024-10-02 08:00:00\nLink: https://x/2/\n";
        let recs = txt_records(text);
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0]["Date"], "2024-10-01 12:00:00");
        assert_eq!(recs[1]["Link"], "https://x/2/");
    }

    #[test]
    fn csv_rows_become_objects() {
        let recs = csv_records("Video ID,Title\nabc, Hello \n").unwrap();
        assert_eq!(recs, vec![json!({"Video ID": "abc", "Title": "Hello"})]);
    }

    #[test]
    fn single_object_is_one_record() {
        let v = json!({"profile": {"name": "x"}});
        assert_eq!(json_records(&v, Some("profile")).unwrap().len(), 1);
        assert!(json_records(&v, Some("nope")).is_err());
    }
}
