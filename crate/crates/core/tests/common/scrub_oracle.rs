//! Independent scrub check: finds every value a ruleset reaches without
//! using the library's selector matcher.

#![allow(dead_code)]

use std::path::Path;

use ddp_audit::parse::list_files;
use ddp_audit::ScrubRuleset;
use regex::Regex;
use serde_json::Value;

/// Selector to regex over `\x1f`-joined key paths, written without the
/// library's matcher.
fn selector_regex(sel: &str) -> Regex {
    let mut parts = Vec::new();
    for seg in sel.split('.') {
        let seg = seg.trim_end_matches("[]");
        parts.push(match seg {
            "**" => "(?:[^\x1f]*\x1f)*".to_string(),
            "*" => "[^\x1f]*\x1f".to_string(),
            s => format!("{}\x1f", regex::escape(s)),
        });
    }
    Regex::new(&format!("^{}$", parts.concat())).unwrap()
}

/// Every (rule, value) the rules reach in a tree, found independently:
/// JSON by a full walk, TXT by a line regex, CSV by header lookup.
pub fn oracle_hits(root: &Path, rules: &ScrubRuleset) -> Vec<(String, String, String)> {
    let res: Vec<(String, Regex)> = rules.key_paths.iter().map(|k| (k.clone(), selector_regex(k))).collect();
    let bare: Vec<(String, String)> = rules
        .key_paths
        .iter()
        .filter_map(|k| {
            let b = k.strip_prefix("**.").unwrap_or(k);
            (!b.contains('.')).then(|| (k.clone(), b.to_string()))
        })
        .collect();
    let mut hits = Vec::new();
    for rel in list_files(root).unwrap() {
        let path = root.join(&rel);
        let Ok(text) = std::fs::read_to_string(&path) else { continue };
        if rel.ends_with(".json") {
            fn walk(v: &Value, path: &str, res: &[(String, Regex)], rel: &str, hits: &mut Vec<(String, String, String)>) {
                match v {
                    Value::Object(m) => {
                        for (k, c) in m {
                            let p = format!("{path}{k}\x1f");
                            if let Some((rule, _)) = res.iter().find(|(_, r)| r.is_match(&p)) {
                                let s = match c {
                                    Value::Null => continue,
                                    Value::String(s) => s.clone(),
                                    other => other.to_string(),
                                };
                                hits.push((rel.to_string(), rule.clone(), s));
                            } else {
                                walk(c, &p, res, rel, hits);
                            }
                        }
                    }
                    Value::Array(a) => a.iter().for_each(|c| walk(c, path, res, rel, hits)),
                    _ => {}
                }
            }
            walk(&serde_json::from_str(&text).unwrap(), "", &res, &rel, &mut hits);
        } else if rel.ends_with(".txt") {
            let line = Regex::new(r"(?m)^([^:\r\n]+):[ \t]*(\S[^\r\n]*?)[ \t]*\r?$").unwrap();
            for c in line.captures_iter(&text) {
                if let Some((rule, _)) = bare.iter().find(|(_, b)| b == c[1].trim()) {
                    hits.push((rel.clone(), rule.clone(), c[2].to_string()));
                }
            }
        } else if rel.ends_with(".csv") {
            let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
            let headers = rdr.headers().unwrap().clone();
            for rec in rdr.records() {
                let rec = rec.unwrap();
                for (i, h) in headers.iter().enumerate() {
                    if let Some((rule, _)) = bare.iter().find(|(_, b)| b == h.trim()) {
                        if let Some(v) = rec.get(i).filter(|v| !v.trim().is_empty()) {
                            hits.push((rel.clone(), rule.clone(), v.to_string()));
                        }
                    }
                }
            }
        }
    }
    hits
}
