#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn ddp_audit<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = Command::new(env!("CARGO_BIN_EXE_ddp-audit")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

pub fn ddp_fixture(platform: &str) -> PathBuf {
    fixtures().join("ddp").join(platform)
}

/// Drops every `generated_at` key, at any depth.
pub fn strip_generated_at(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove("generated_at");
            m.values_mut().for_each(strip_generated_at);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_generated_at),
        _ => {}
    }
}

/// File bytes with `generated_at` removed from JSON files.
pub fn normalized(path: &Path) -> Vec<u8> {
    let bytes = std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e == "json") {
        if let Ok(mut v) = serde_json::from_slice::<serde_json::Value>(&bytes) {
            strip_generated_at(&mut v);
            return serde_json::to_vec_pretty(&v).unwrap();
        }
    }
    bytes
}

/// Relative path to normalized bytes for every file under `root`.
pub fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    ddp_audit::parse::list_files(root)
        .unwrap()
        .into_iter()
        .map(|rel| {
            let bytes = normalized(&root.join(&rel));
            (rel, bytes)
        })
        .collect()
}
