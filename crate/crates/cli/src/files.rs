use std::fs;
use std::path::{Path, PathBuf};

use cbdc_core::FORMAT_VERSION;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    }
    let file_name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{file_name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| CliError::input(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::input(format!("cannot move output into {}: {e}", path.display()))
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Reads an input the user pointed at; a missing file is an input error.
pub fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

/// Reads an artifact produced by an earlier stage; a missing file is a
/// pipeline-state error.
pub fn read_artifact(path: &Path) -> CliResult<String> {
    if !path.exists() {
        return Err(CliError::state(format!(
            "{} does not exist; run the stage that produces it first",
            path.display()
        )));
    }
    read_input(path)
}

/// Parses an artifact and rejects any `format_version` other than ours.
pub fn check_version(text: &str, path: &Path) -> CliResult<Value> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::input(e.to_string()).at(path))?;
    match value.get("format_version").and_then(Value::as_u64) {
        Some(v) if v == u64::from(FORMAT_VERSION) => Ok(value),
        Some(v) => Err(CliError::state(format!(
            "format_version {v} does not match this build ({FORMAT_VERSION})"
        ))
        .at(path)),
        None => Err(CliError::input("missing format_version").at(path)),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Echo of one command run: the resolved configuration, the seed and digests
/// of every file read and written. Contains no timestamps so identical runs
/// produce identical manifests.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub format_version: u32,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl Manifest {
    pub fn new(command: &'static str, seed: Option<u64>, config: Value) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    /// Writes `bytes` atomically and records the file.
    pub fn emit(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        write_atomic(path, bytes)?;
        self.outputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn emit_json<T: Serialize>(&mut self, path: &Path, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.emit(path, text.as_bytes())
    }

    /// Writes `out_dir/manifest.json`. Output paths are stored relative to
    /// `out_dir` so the manifest does not depend on where the run was placed.
    pub fn finish(mut self, out_dir: &Path) -> CliResult<PathBuf> {
        for o in &mut self.outputs {
            if let Ok(rel) = Path::new(&o.path).strip_prefix(out_dir) {
                o.path = rel.display().to_string();
            }
        }
        let path = out_dir.join("manifest.json");
        write_json(&path, &self)?;
        Ok(path)
    }
}

/// If `dir/manifest.json` exists, its version must match ours; the parsed
/// manifest is returned.
pub fn check_sibling_manifest(file: &Path) -> CliResult<Option<Value>> {
    let manifest = file.parent().unwrap_or(Path::new(".")).join("manifest.json");
    if !manifest.exists() {
        return Ok(None);
    }
    check_version(&read_input(&manifest)?, &manifest).map(Some)
}
