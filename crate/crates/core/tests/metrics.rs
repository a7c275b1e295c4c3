use cbdc_core::classifier::PosteriorPredictive;
use cbdc_core::conformal::PredictionSet;
use cbdc_core::metrics::{accuracy, auc_binary, auc_ovr, brier, coverage, ece, evaluate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn post(p: Vec<f64>) -> PosteriorPredictive {
    PosteriorPredictive::new(p).unwrap()
}

fn random_posteriors(rng: &mut ChaCha8Rng, n: usize, k: usize) -> (Vec<PosteriorPredictive>, Vec<usize>) {
    let preds = (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>().powi(3)).collect();
            let total: f64 = raw.iter().sum();
            post(raw.iter().map(|v| v / total).collect())
        })
        .collect();
    let labels = (0..n).map(|i| i % k).collect();
    (preds, labels)
}

#[test]
fn calibrated_stream_has_small_ece() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 100_000;
    let mut preds = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let c: f64 = rng.random_range(0.5..1.0);
        preds.push(post(vec![c, 1.0 - c]));
        labels.push(usize::from(rng.random::<f64>() >= c));
    }
    let e = ece(&preds, &labels, 10).unwrap();
    assert!(e <= 0.01, "ECE {e}");
}

#[test]
fn ece_order_free_and_single_bin() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (preds, labels) = random_posteriors(&mut rng, 300, 3);
    let base = ece(&preds, &labels, 10).unwrap();
    let mut idx: Vec<usize> = (0..preds.len()).collect();
    idx.shuffle(&mut rng);
    let p2: Vec<_> = idx.iter().map(|&i| preds[i].clone()).collect();
    let l2: Vec<_> = idx.iter().map(|&i| labels[i]).collect();
    assert!((ece(&p2, &l2, 10).unwrap() - base).abs() < 1e-12);
    let acc = accuracy(&preds, &labels).unwrap();
    let conf = preds.iter().map(PosteriorPredictive::max_prob).sum::<f64>() / preds.len() as f64;
    assert!((ece(&preds, &labels, 1).unwrap() - (acc - conf).abs()).abs() < 1e-12);
}

#[test]
fn brier_rewards_mass_on_the_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let k = rng.random_range(2..6);
        let (preds, _) = random_posteriors(&mut rng, 1, k);
        let p = preds[0].probs().to_vec();
        let y = rng.random_range(0..k);
        if p[y] > 0.99 {
            continue;
        }
        // move a little mass from the other classes to y
        let t = 0.05 * (1.0 - p[y]);
        let q: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(j, &v)| if j == y { v + t } else { v - t * v / (1.0 - p[y]) })
            .collect();
        assert!(brier(&[post(q)], &[y]).unwrap() < brier(&preds, &[y]).unwrap());
    }
}

#[test]
fn auc_ignores_monotone_transforms() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let pos: Vec<f64> = (0..20).map(|_| rng.random()).collect();
        let neg: Vec<f64> = (0..30).map(|_| rng.random::<f64>() * 0.8).collect();
        let f = |v: &f64| (3.0 * v).exp() - 7.0;
        let a = auc_binary(&pos, &neg).unwrap();
        let b = auc_binary(&pos.iter().map(f).collect::<Vec<_>>(), &neg.iter().map(f).collect::<Vec<_>>()).unwrap();
        assert!((a - b).abs() < 1e-15);
    }
    let perfect = vec![post(vec![0.9, 0.1]), post(vec![0.2, 0.8]), post(vec![0.6, 0.4])];
    assert_eq!(auc_ovr(&perfect, &[0, 1, 0]).unwrap(), 1.0);
    let flat = vec![post(vec![0.5, 0.5]); 4];
    assert_eq!(auc_ovr(&flat, &[0, 1, 0, 1]).unwrap(), 0.5);
}

#[test]
fn evaluate_examples() {
    let preds = vec![post(vec![1.0, 0.0, 0.0]), post(vec![0.0, 1.0, 0.0]), post(vec![0.0, 0.0, 1.0])];
    let labels = [0, 1, 2];
    let argmax: Vec<_> = preds.iter().map(PredictionSet::argmax_only).collect();
    let r = evaluate(&preds, &argmax, &labels, 10).unwrap();
    assert_eq!((r.accuracy, r.conformal_coverage, r.ece, r.brier), (1.0, 1.0, 0.0, 0.0));
    let all: Vec<_> = preds.iter().map(|p| PredictionSet::from_threshold(p, 1.0, Some(0.1))).collect();
    let r = evaluate(&preds, &all, &labels, 10).unwrap();
    assert_eq!((r.conformal_coverage, r.mean_set_size), (1.0, 3.0));
    let json = serde_json::to_string(&r).unwrap();
    let t1 = json.find("\"table1_schema\"").unwrap();
    let order: Vec<usize> = ["\"ACC\"", "\"AUC\"", "\"ECE\"", "\"BS\"", "\"CC\"", "\"F1\""]
        .iter()
        .map(|k| json[t1..].find(k).unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn report_ranges_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let k = rng.random_range(2..5);
        let (preds, labels) = random_posteriors(&mut rng, 60, k);
        let q = rng.random::<f64>();
        let sets: Vec<_> = preds.iter().map(|p| PredictionSet::from_threshold(p, q, None)).collect();
        let r = evaluate(&preds, &sets, &labels, 10).unwrap();
        for v in [r.accuracy, r.conformal_coverage, r.macro_f1, r.macro_auc_ovr, r.ece] {
            assert!((0.0..=1.0).contains(&v));
        }
        assert!((0.0..=2.0).contains(&r.brier));
    }
}

#[test]
fn argmax_never_beats_a_permissive_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let (preds, labels) = random_posteriors(&mut rng, 40, 3);
        // q at least 1 − max p for every sample, so each set holds the argmax
        let q = preds.iter().map(|p| 1.0 - p.max_prob()).fold(0.0, f64::max) + rng.random::<f64>() * 0.1;
        let conf: Vec<_> = preds.iter().map(|p| PredictionSet::from_threshold(p, q.min(1.0), None)).collect();
        let top: Vec<_> = preds.iter().map(PredictionSet::argmax_only).collect();
        assert!(coverage(&top, &labels).unwrap() <= coverage(&conf, &labels).unwrap());
    }
}
