use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Train / calibration / test proportions. All three must be positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub cal: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn new(train: f64, cal: f64, test: f64) -> Result<Self> {
        let f = Self { train, cal, test };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.cal, self.test];
        if parts.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return invalid(format!("split fractions must all be positive, got {parts:?}"));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return invalid(format!("split fractions must sum to 1, got {parts:?}"));
        }
        Ok(())
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.cal, self.test]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub cal: Vec<T>,
    pub test: Vec<T>,
}

/// Largest-remainder apportionment of `n` items over `fractions`; ties in the
/// remainder go to the earlier part.
pub(crate) fn largest_remainder(n: usize, fractions: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    // stable sort keeps split order on equal remainders
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra)
    });
    for &part in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[part] += 1;
    }
    counts
}

/// Splits labeled samples so every class is represented proportionally in
/// each of the three parts.
///
/// Within a class the samples are shuffled with `seed` and then cut by the
/// largest-remainder counts. Classes are processed in ascending label order.
pub fn stratified_split<T: Clone>(
    samples: &[(T, usize)],
    fractions: SplitFractions,
    seed: u64,
) -> Result<Split<(T, usize)>> {
    fractions.validate()?;
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, (_, label)) in samples.iter().enumerate() {
        by_class.entry(*label).or_default().push(i);
    }
    if let Some((&class, members)) = by_class.iter().find(|(_, m)| m.len() < 3) {
        return Err(Error::Stratification {
            class,
            count: members.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split {
        train: Vec::new(),
        cal: Vec::new(),
        test: Vec::new(),
    };
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        let counts = largest_remainder(members.len(), &fractions.as_array());
        let (n_train, n_cal) = (counts[0], counts[1]);
        for (pos, &idx) in members.iter().enumerate() {
            let item = samples[idx].clone();
            if pos < n_train {
                split.train.push(item);
            } else if pos < n_train + n_cal {
                split.cal.push(item);
            } else {
                split.test.push(item);
            }
        }
    }
    Ok(split)
}
