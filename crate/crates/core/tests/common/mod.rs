#![allow(dead_code)]

use fidelity_moo::nn::{MlpModel, OutputKind};
use fidelity_moo::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::new(rows, cols, normal_vec(rng, rows * cols)).unwrap()
}

/// A random MLP with ≤3 layers and ≤16 units per hidden layer, biases randomised too.
pub fn random_model(rng: &mut ChaCha8Rng) -> MlpModel {
    let d = rng.random_range(1..=6);
    let depth = rng.random_range(0..=2);
    let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=16)).collect();
    let kind = if rng.random_bool(0.5) {
        OutputKind::BinaryProbability
    } else {
        OutputKind::RegressionScalar
    };
    let m = MlpModel::init(d, &hidden, kind, rng);
    let params: Vec<f64> = m
        .flatten_params()
        .iter()
        .map(|p| p + 0.1 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    m.unflatten_params(&params).unwrap()
}

/// Central difference of `f` at `x` along each coordinate.
pub fn central_diff(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest relative error, with `floor` guarding entries that are ~0 in both.
pub fn max_rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}
