use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SplitTag;
use crate::error::{Error, Result};

/// Train/validation fractions; the test split takes the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.70,
            val: 0.15,
        }
    }
}

impl SplitFractions {
    fn validate(&self) -> Result<()> {
        let ok = self.train > 0.0 && self.val >= 0.0 && self.train + self.val <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("bad split fractions {self:?}")))
        }
    }
}

/// Apportions `total` across groups proportional to `sizes` (largest remainder),
/// never exceeding `caps`.
fn apportion(total: usize, sizes: &[usize], caps: &[usize]) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    if n == 0 {
        return vec![0; sizes.len()];
    }
    let quotas: Vec<f64> = sizes
        .iter()
        .map(|&s| total as f64 * s as f64 / n as f64)
        .collect();
    let mut out: Vec<usize> = quotas
        .iter()
        .zip(caps)
        .map(|(q, &c)| (q.floor() as usize).min(c))
        .collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut left = total.saturating_sub(out.iter().sum());
    while left > 0 {
        let mut progressed = false;
        for &g in &order {
            if left == 0 {
                break;
            }
            if out[g] < caps[g] {
                out[g] += 1;
                left -= 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    out
}

/// Seeded shuffle-then-cut split. With `stratify`, each label keeps (up to rounding)
/// the global proportions while split sizes stay exactly `round(fraction · N)`.
pub fn assign_splits(
    targets: &[f64],
    stratify: bool,
    fractions: SplitFractions,
    seed: u64,
) -> Result<Vec<SplitTag>> {
    fractions.validate()?;
    let n = targets.len();
    let n_train = (fractions.train * n as f64).round() as usize;
    let n_val = ((fractions.val * n as f64).round() as usize).min(n - n_train.min(n));
    let n_train = n_train.min(n);

    let mut groups: Vec<Vec<usize>> = if stratify {
        let mut neg = Vec::new();
        let mut pos = Vec::new();
        for (i, &t) in targets.iter().enumerate() {
            if t == 1.0 {
                pos.push(i);
            } else {
                neg.push(i);
            }
        }
        vec![neg, pos]
    } else {
        vec![(0..n).collect()]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for g in &mut groups {
        g.shuffle(&mut rng);
    }
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let train_counts = apportion(n_train, &sizes, &sizes);
    let remaining: Vec<usize> = sizes
        .iter()
        .zip(&train_counts)
        .map(|(s, t)| s - t)
        .collect();
    let val_counts = apportion(n_val, &sizes, &remaining);

    let mut tags = vec![SplitTag::Test; n];
    for ((g, &nt), &nv) in groups.iter().zip(&train_counts).zip(&val_counts) {
        for (k, &i) in g.iter().enumerate() {
            tags[i] = if k < nt {
                SplitTag::Train
            } else if k < nt + nv {
                SplitTag::Val
            } else {
                SplitTag::Test
            };
        }
    }
    Ok(tags)
}
