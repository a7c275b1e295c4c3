use cbdc_core::classifier::{
    composite_gradient, composite_loss, generalization_gap_report, predict_posterior, train, Batch,
    EnsembleModel, FeatureRecord, Normalizer, TrainingConfig, Weights,
};
use cbdc_core::imaging::{generate_synthetic, SyntheticConfig};
use cbdc_core::pipeline::featurize_batch;
use cbdc_core::topology::TopoFeatureVector;
use cbdc_core::FORMAT_VERSION;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const T: usize = 8;

fn random_batch(rng: &mut ChaCha8Rng, n: usize, d: usize, k: usize, n_pairs: usize) -> Batch {
    let mut v = |len: usize| (0..len).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>();
    let features = (0..n).map(|_| v(d)).collect();
    let pairs = (0..n_pairs).map(|_| (v(d), v(d))).collect();
    Batch {
        n_classes: k,
        features,
        labels: (0..n).map(|i| i % k).collect(),
        pairs,
    }
}

fn random_weights(rng: &mut ChaCha8Rng, k: usize, d: usize) -> Weights {
    Weights::from_flat(k, d, (0..k * (d + 1)).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let batch = random_batch(&mut rng, 10, 5, 3, 6);
        let w = random_weights(&mut rng, 3, 5);
        let (l1, l2) = (0.3, 0.1);
        let g = composite_gradient(&w, &batch, l1, l2).unwrap();
        let h = 1e-6;
        for j in 0..w.as_slice().len() {
            let mut plus = w.clone();
            plus.as_mut_slice()[j] += h;
            let mut minus = w.clone();
            minus.as_mut_slice()[j] -= h;
            let fd = (composite_loss(&plus, &batch, l1, l2).unwrap() - composite_loss(&minus, &batch, l1, l2).unwrap())
                / (2.0 * h);
            let a = g.as_slice()[j];
            assert!((a - fd).abs() <= 1e-5 * a.abs().max(1.0), "component {j}: {a} vs {fd}");
        }
    }
}

#[test]
fn loss_is_lambda2_strongly_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let batch = random_batch(&mut rng, 12, 4, 3, 5);
        let lambda2 = rng.random_range(0.01..1.0);
        let a = random_weights(&mut rng, 3, 4);
        let b = random_weights(&mut rng, 3, 4);
        let mid = Weights::from_flat(
            3,
            4,
            a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| 0.5 * (x + y)).collect(),
        )
        .unwrap();
        let dist2: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).powi(2)).sum();
        let f = |w: &Weights| composite_loss(w, &batch, 0.2, lambda2).unwrap();
        assert!(f(&mid) <= (f(&a) + f(&b)) / 2.0 - lambda2 / 8.0 * dist2 + 1e-12);
    }
}

fn corpus(n: usize, fractions: Vec<f64>, seed: u64) -> Vec<FeatureRecord> {
    let cfg = SyntheticConfig {
        n_samples: n,
        class_fractions: fractions,
        seed,
        ..Default::default()
    };
    let data: Vec<_> = generate_synthetic(&cfg).unwrap().into_iter().map(|(i, y)| (i, Some(y))).collect();
    featurize_batch(&data, T).unwrap()
}

fn accuracy(model: &EnsembleModel, set: &[FeatureRecord]) -> f64 {
    let hits = set
        .iter()
        .filter(|r| predict_posterior(model, r).unwrap().argmax() == r.label.unwrap())
        .count();
    hits as f64 / set.len() as f64
}

#[test]
fn synthetic_corpus_is_learned() {
    let records = corpus(200, vec![0.5, 0.5], 11);
    // a hand threshold on the longest H1 bar already separates the classes
    let by_rule = records
        .iter()
        .filter(|r| usize::from(r.topo.max_persistence(1) >= 0.3) == r.label.unwrap())
        .count() as f64
        / records.len() as f64;
    assert!(by_rule >= 0.95, "threshold rule accuracy {by_rule}");
    let (model, trace) = train(&records, &[], &TrainingConfig::default()).unwrap();
    assert!(accuracy(&model, &records) >= 0.95);
    assert_eq!(trace.entries.len(), model.config.epochs * model.members.len());
    for m in 0..model.members.len() {
        assert!(trace.is_non_increasing_after(m, 0.1));
    }
}

#[test]
fn training_is_deterministic() {
    let records = corpus(60, vec![0.5, 0.5], 3);
    let cfg = TrainingConfig {
        epochs: 50,
        ..Default::default()
    };
    let (a, ta) = train(&records, &[], &cfg).unwrap();
    let (b, tb) = train(&records, &[], &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(ta, tb);
}

#[test]
fn zero_feature_input_predicts_priors() {
    let topo = TopoFeatureVector {
        values: vec![1.0; 8 + 2 * 2],
        thresholds: 2,
    };
    let labels = [0, 0, 0, 1, 1, 1, 1, 1, 2, 2];
    let records: Vec<FeatureRecord> = labels
        .iter()
        .map(|&y| FeatureRecord::new(topo.clone(), [0.5, 0.1, 0.2, 0.8], Some(y)).unwrap())
        .collect();
    let cfg = TrainingConfig {
        lambda2: 1e-6,
        epochs: 3000,
        ensemble_size: 2,
        bootstrap: false,
        ..Default::default()
    };
    let (model, trace) = train(&records, &[], &cfg).unwrap();
    assert_eq!(model.normalizer.kept.len(), 0);
    assert_eq!(model.normalizer.dropped.len(), records[0].dim());
    assert_eq!(trace.member(0).count(), cfg.epochs);
    let p = predict_posterior(&model, &records[0]).unwrap();
    for (got, want) in p.probs().iter().zip([0.3, 0.5, 0.2]) {
        assert!((got - want).abs() < 1e-3, "{:?}", p.probs());
    }
}

#[test]
fn relabeling_permutes_the_posterior() {
    let records = corpus(150, vec![0.4, 0.3, 0.3], 21);
    let perm = [2usize, 0, 1];
    let relabeled: Vec<FeatureRecord> = records
        .iter()
        .map(|r| FeatureRecord {
            label: r.label.map(|y| perm[y]),
            ..r.clone()
        })
        .collect();
    let cfg = TrainingConfig {
        epochs: 1500,
        ensemble_size: 2,
        ..Default::default()
    };
    let (a, _) = train(&records, &[], &cfg).unwrap();
    let (b, _) = train(&relabeled, &[], &cfg).unwrap();
    for r in &records {
        let pa = predict_posterior(&a, r).unwrap();
        let pb = predict_posterior(&b, r).unwrap();
        for k in 0..3 {
            assert!((pa.probs()[k] - pb.probs()[perm[k]]).abs() < 1e-3);
        }
        assert_eq!(perm[pa.argmax()], pb.argmax());
    }
}

fn bias_only_model(members: Vec<Vec<Vec<f64>>>) -> EnsembleModel {
    EnsembleModel {
        format_version: FORMAT_VERSION,
        n_classes: 2,
        normalizer: Normalizer {
            mean: vec![0.0; 16],
            std: vec![0.0; 16],
            kept: vec![],
            dropped: (0..16).collect(),
        },
        members: members.into_iter().map(|m| Weights::from_rows(m).unwrap()).collect(),
        config: TrainingConfig::default(),
        step_sizes: vec![],
    }
}

#[test]
fn posterior_is_member_average() {
    let record = FeatureRecord::from_values(&[0.25; 16], 2, None).unwrap();
    let single = bias_only_model(vec![vec![vec![0.3], vec![-0.2]]]);
    let p = predict_posterior(&single, &record).unwrap();
    let direct = single.members[0].predict(&[]);
    for (a, b) in p.probs().iter().zip(direct.probs()) {
        assert!((a - b).abs() < 1e-15);
    }
    let opposed = bias_only_model(vec![vec![vec![60.0], vec![-60.0]], vec![vec![-60.0], vec![60.0]]]);
    let p = predict_posterior(&opposed, &record).unwrap();
    assert!((p.probs()[0] - 0.5).abs() < 1e-12);
    assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let short = FeatureRecord::from_values(&[0.25; 14], 1, None).unwrap();
    assert!(predict_posterior(&opposed, &short).is_err());
}

#[test]
fn model_json_round_trip_and_version_check() {
    let records = corpus(40, vec![0.5, 0.5], 8);
    let cfg = TrainingConfig {
        epochs: 20,
        ensemble_size: 2,
        ..Default::default()
    };
    let (model, _) = train(&records, &[], &cfg).unwrap();
    let json = model.to_json().unwrap();
    assert_eq!(EnsembleModel::from_json(&json).unwrap(), model);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(value["members"][0][0].is_array(), "weights are nested arrays");
    let bumped = json.replace("\"format_version\": 1", "\"format_version\": 99");
    assert!(EnsembleModel::from_json(&bumped).is_err());
}

#[test]
fn gap_report_examples() {
    let records = corpus(120, vec![0.5, 0.5], 4);
    let cfg = TrainingConfig {
        epochs: 100,
        ..Default::default()
    };
    let (model, _) = train(&records, &[], &cfg).unwrap();
    let same = generalization_gap_report(&model, &records, &records, &cfg, 0.05).unwrap();
    assert_eq!(same.observed_gap, 0.0);
    assert!(!same.violated && same.bound > 0.0);
    assert!(generalization_gap_report(&model, &records, &[], &cfg, 0.05).is_err());
}

#[test]
fn gap_stays_under_bound_across_seeds() {
    let pool = corpus(1200, vec![0.5, 0.5], 99);
    let cfg = TrainingConfig {
        ensemble_size: 1,
        epochs: 150,
        ..Default::default()
    };
    let mut held = 0;
    for rep in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(rep);
        let mut idx: Vec<usize> = (0..pool.len()).collect();
        rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
        let train_set: Vec<_> = idx[..100].iter().map(|&i| pool[i].clone()).collect();
        let test_set: Vec<_> = idx[100..300].iter().map(|&i| pool[i].clone()).collect();
        let cfg = TrainingConfig { seed: rep, ..cfg.clone() };
        let (model, _) = train(&train_set, &[], &cfg).unwrap();
        let report = generalization_gap_report(&model, &train_set, &test_set, &cfg, 0.05).unwrap();
        held += usize::from(!report.violated);
    }
    assert!(held >= 99, "bound held in {held}/100 repetitions");
}
