//! Seeded synthetic datasets with known structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dataset, SplitFractions, Task};
use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    /// `y = w·x + b + noise·ε`
    LinearRegression,
    /// `y = 1[w·x + b + noise·ε > 0]`
    LinearLogit,
    /// Labels from a fixed random two-layer teacher: a dominant linear part plus a
    /// tanh hidden layer, thresholded at its median.
    Nonlinear,
}

/// Generating hyperplane of the linear kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearTruth {
    pub weights: Vec<f64>,
    pub bias: f64,
}

const TEACHER_HIDDEN: usize = 16;
/// Share of the teacher's logit carried by the hidden layer.
const TEACHER_NONLINEAR_GAIN: f64 = 1.0;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Features are i.i.d. standard normal (already on the standardised scale); rows are
/// split 70/15/15 with the same seed.
pub fn make_synthetic(
    kind: SyntheticKind,
    n: usize,
    d: usize,
    noise: f64,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(Error::Invalid(
            "synthetic data needs n ≥ 1 and d ≥ 1".into(),
        ));
    }
    if noise.is_nan() || noise < 0.0 {
        return Err(Error::Invalid(format!("noise must be ≥ 0, got {noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (d as f64).sqrt();
    let weights: Vec<f64> = (0..d).map(|_| normal(&mut rng) * scale * 2.0).collect();
    let bias = normal(&mut rng) * 0.5;
    let data: Vec<f64> = (0..n * d).map(|_| normal(&mut rng)).collect();
    let x = DenseMatrix::new(n, d, data)?;

    let (task, targets, truth) = match kind {
        SyntheticKind::LinearRegression => {
            let y = x
                .iter_rows()
                .map(|r| dot(&weights, r) + bias + noise * normal(&mut rng))
                .collect();
            (Task::Regression, y, Some(LinearTruth { weights, bias }))
        }
        SyntheticKind::LinearLogit => {
            let y = x
                .iter_rows()
                .map(|r| ((dot(&weights, r) + bias + noise * normal(&mut rng)) > 0.0) as u8 as f64)
                .collect();
            (
                Task::BinaryClassification,
                y,
                Some(LinearTruth { weights, bias }),
            )
        }
        SyntheticKind::Nonlinear => {
            let u: Vec<f64> = (0..TEACHER_HIDDEN * d)
                .map(|_| normal(&mut rng) * scale * 1.5)
                .collect();
            let c: Vec<f64> = (0..TEACHER_HIDDEN)
                .map(|_| normal(&mut rng) * 0.5)
                .collect();
            let v: Vec<f64> = (0..TEACHER_HIDDEN)
                .map(|_| normal(&mut rng) * TEACHER_NONLINEAR_GAIN / (TEACHER_HIDDEN as f64).sqrt())
                .collect();
            let logits: Vec<f64> = x
                .iter_rows()
                .map(|r| {
                    let hidden: f64 = (0..TEACHER_HIDDEN)
                        .map(|h| v[h] * (dot(&u[h * d..(h + 1) * d], r) + c[h]).tanh())
                        .sum();
                    dot(&weights, r) + hidden + noise * normal(&mut rng)
                })
                .collect();
            let mut sorted = logits.clone();
            sorted.sort_by(f64::total_cmp);
            let median = sorted[n / 2];
            let y = logits.iter().map(|&z| (z > median) as u8 as f64).collect();
            (Task::BinaryClassification, y, None)
        }
    };
    let names = (0..d).map(|j| format!("x{j}")).collect();
    let mut ds =
        Dataset::new(x, targets, task, names)?.with_split(SplitFractions::default(), seed)?;
    ds.truth = truth;
    Ok(ds)
}
