mod common;

use std::fs;

use cbdc_core::pipeline::parse_features_csv;
use common::{cbdc, corpus_config, ok, p, stderr};

fn constant_pgm(value: u8) -> String {
    let mut s = String::from("P2\n8 8\n255\n");
    for _ in 0..8 {
        s.push_str(&vec![value.to_string(); 8].join(" "));
        s.push('\n');
    }
    s
}

#[test]
fn empty_directory_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images");
    fs::create_dir(&images).unwrap();
    let out = cbdc(&["featurize", "--images", p(&images), "--out", p(&dir.path().join("feat"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupt_pgm_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images");
    fs::create_dir(&images).unwrap();
    fs::write(images.join("good.pgm"), constant_pgm(10)).unwrap();
    fs::write(images.join("broken.pgm"), "P2\n8 8\n255\n1 2 3\n").unwrap();
    let out = cbdc(&["featurize", "--images", p(&images), "--out", p(&dir.path().join("feat"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("broken.pgm"), "{}", stderr(&out));
}

#[test]
fn constant_image_has_one_component_and_no_loops() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images");
    fs::create_dir(&images).unwrap();
    fs::write(images.join("flat.pgm"), constant_pgm(128)).unwrap();
    let feat = dir.path().join("feat");
    ok(&["featurize", "--images", p(&images), "--thresholds", "8", "--out", p(&feat)]);
    let (t, rows) = parse_features_csv(&fs::read_to_string(feat.join("features.csv")).unwrap()).unwrap();
    assert_eq!(t, 8);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].id, "flat");
    assert_eq!(rows[0].record.label, None);
    assert_eq!(rows[0].record.topo.count(0), 1.0);
    assert_eq!(rows[0].record.topo.count(1), 0.0);
}

#[test]
fn noiseless_rings_have_a_loop() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = corpus_config(dir.path(), "n_samples = 8\nnoise_sigma = 0\n");
    let gen = dir.path().join("gen");
    ok(&["generate", "--config", p(&cfg), "--out", p(&gen)]);
    let feat = dir.path().join("feat");
    ok(&["featurize", "--images", p(&gen.join("images")), "--out", p(&feat)]);
    let (_, rows) = parse_features_csv(&fs::read_to_string(feat.join("features.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 8);
    let rings: Vec<_> = rows.iter().filter(|r| r.record.label == Some(1)).collect();
    assert!(!rings.is_empty());
    for r in rings {
        assert!(r.record.topo.count(1) >= 1.0, "{} has no H1 bar", r.id);
    }
    // labels were picked up from the generator output, so every row has a split
    assert!(rows.iter().all(|r| r.split.is_some()));
    let pairs = fs::read_to_string(feat.join("pairs.csv")).unwrap();
    assert!(pairs.lines().count() > 1);
}
