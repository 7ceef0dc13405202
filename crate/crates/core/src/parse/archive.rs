use std::fs::File;
use std::path::{Path, PathBuf};

use tempfile::TempDir;

use crate::error::{Error, Result};

/// A DDP on disk: either the caller's directory or a temporary extraction
/// of a zip archive, removed on drop.
pub struct DdpInput {
    root: PathBuf,
    _extracted: Option<TempDir>,
}

impl DdpInput {
    pub fn root(&self) -> &Path {
        &self.root
    }
}

pub fn open_input(path: &Path) -> Result<DdpInput> {
    let meta = std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_dir() {
        return Ok(DdpInput {
            root: path.to_path_buf(),
            _extracted: None,
        });
    }
    let is_zip = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("zip"));
    if !is_zip {
        return Err(Error::NotADdp(format!(
            "{} is neither a directory nor a .zip archive",
            path.display()
        )));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut archive = zip::ZipArchive::new(file).map_err(|e| Error::Archive(e.to_string()))?;
    let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    archive
        .extract(dir.path())
        .map_err(|e| Error::Archive(e.to_string()))?;
    Ok(DdpInput {
        root: dir.path().to_path_buf(),
        _extracted: Some(dir),
    })
}
