#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn cbdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbdc"))
        .args(args)
        .env_remove("CBDC_THREADS")
        .output()
        .expect("spawn cbdc")
}

pub fn ok(args: &[&str]) -> Output {
    let out = cbdc(args);
    assert!(
        out.status.success(),
        "cbdc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

pub fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Writes a key=value corpus config and returns its path.
pub fn corpus_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("corpus.cfg");
    std::fs::write(&path, body).unwrap();
    path
}
