mod common;

use std::fs;

use common::{cbdc, corpus_config, ok, p, stderr};

#[test]
fn writes_one_image_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = corpus_config(dir.path(), "n_samples = 10\n");
    let out = dir.path().join("gen");
    ok(&["generate", "--config", p(&cfg), "--out", p(&out)]);
    let pgms = fs::read_dir(out.join("images")).unwrap().count();
    assert_eq!(pgms, 10);
    let labels = fs::read_to_string(out.join("labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 11);
    assert!(labels.starts_with("id,label\n"));
    let manifest = common::json(&out.join("manifest.json"));
    assert_eq!(manifest["format_version"], 1);
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["config"]["n_samples"], 10);
}

#[test]
fn same_config_and_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = corpus_config(dir.path(), "n_samples = 12\nnoise_sigma = 0.05\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["generate", "--config", p(&cfg), "--seed", "7", "--out", p(out)]);
    }
    let mut names: Vec<_> = fs::read_dir(a.join("images")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for name in &names {
        assert_eq!(
            fs::read(a.join("images").join(name)).unwrap(),
            fs::read(b.join("images").join(name)).unwrap()
        );
    }
    for file in ["labels.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn small_image_side_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = corpus_config(dir.path(), "image_side = 4\n");
    let out = cbdc(&["generate", "--config", p(&cfg), "--out", p(&dir.path().join("gen"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(">= 8"), "{}", stderr(&out));
}

#[test]
fn unwritable_output_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = corpus_config(dir.path(), "n_samples = 4\n");
    let out = cbdc(&["generate", "--config", p(&cfg), "--out", p(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(2));
}
