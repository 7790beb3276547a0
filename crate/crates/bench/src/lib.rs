//! Fixtures shared by the benchmarks.

use fidelity_moo::data::{make_synthetic, SyntheticKind};
use fidelity_moo::{Dataset, DenseMatrix, MlpModel, OutputKind, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gradient_pair(dim: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        (0..dim)
            .map(|_| rng.sample(StandardNormal))
            .collect::<Vec<f64>>()
    };
    (draw(), draw())
}

/// A `d → hidden → 1` classifier and a standard-normal batch for it.
pub fn model_and_batch(
    d: usize,
    hidden: &[usize],
    rows: usize,
    seed: u64,
) -> (MlpModel, DenseMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = MlpModel::init(d, hidden, OutputKind::BinaryProbability, &mut rng);
    let data = (0..rows * d).map(|_| rng.sample(StandardNormal)).collect();
    (model, DenseMatrix::new(rows, d, data).unwrap())
}

pub fn synthetic(n: usize, d: usize) -> Dataset {
    make_synthetic(SyntheticKind::Nonlinear, n, d, 0.0, 7).unwrap()
}

pub fn one_epoch(hidden: &[usize], batch_size: usize) -> TrainConfig {
    TrainConfig {
        max_epochs: 1,
        hidden: hidden.to_vec(),
        batch_size,
        ..TrainConfig::default()
    }
}
