use std::path::Path;

use walkdir::WalkDir;

use super::manifest::{compile_glob, ParserManifest};
use crate::error::{Error, Result};
use crate::model::Platform;

/// Relative `/`-separated paths of every regular file below `root`, sorted.
pub fn list_files(root: &Path) -> Result<Vec<String>> {
    let meta = std::fs::metadata(root).map_err(|e| Error::io(root, e))?;
    if !meta.is_dir() {
        return Err(Error::Invalid(format!("{} is not a directory", root.display())));
    }
    let mut out = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::io(path, e.into())
        })?;
        if entry.file_type().is_file() {
            let rel = entry.path().strip_prefix(root).expect("walkdir stays under root");
            let parts: Vec<_> = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect();
            out.push(parts.join("/"));
        }
    }
    Ok(out)
}

/// Number of signature globs that match at least one file.
pub fn signature_score(files: &[String], manifest: &ParserManifest) -> Result<usize> {
    let mut score = 0;
    for sig in &manifest.signatures {
        let m = compile_glob(sig)?;
        if files.iter().any(|f| m.is_match(f)) {
            score += 1;
        }
    }
    Ok(score)
}

/// Picks the manifest whose signatures match best. No match at all yields
/// `Platform::Generic`; a tie between the best candidates is an error.
pub fn detect_platform(root: &Path, manifests: &[ParserManifest]) -> Result<Platform> {
    let files = list_files(root)?;
    let mut scored = Vec::new();
    for m in manifests.iter().filter(|m| m.platform != Platform::Generic) {
        scored.push((signature_score(&files, m)?, m.platform));
    }
    let best = scored.iter().map(|(s, _)| *s).max().unwrap_or(0);
    if best == 0 {
        return Ok(Platform::Generic);
    }
    let mut winners: Vec<Platform> = scored
        .into_iter()
        .filter(|(s, _)| *s == best)
        .map(|(_, p)| p)
        .collect();
    winners.dedup();
    match winners.as_slice() {
        [one] => Ok(*one),
        _ => Err(Error::AmbiguousPlatform(winners)),
    }
}
