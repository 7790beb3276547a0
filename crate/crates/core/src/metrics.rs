//! Task metrics, global fidelity and neighbourhood fidelity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Task;
use crate::error::{ensure_len, Error, Result};
use crate::linalg::DenseMatrix;
use crate::losses::{loss, LossKind};
use crate::nn::MlpModel;
use crate::seeds::derive_seed;
use crate::surrogate::LinearSurrogate;

/// F1 of the positive class; 0 when precision + recall = 0.
pub fn f1_score(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    ensure_len("f1_score", predicted.len(), truth.len())?;
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&p, &t) in predicted.iter().zip(truth) {
        if (p != 0.0 && p != 1.0) || (t != 0.0 && t != 1.0) {
            return Err(Error::Invalid("f1_score labels must be 0 or 1".into()));
        }
        match (p == 1.0, t == 1.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fneg) as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Thresholds probabilities at 0.5.
pub fn predict_labels(probabilities: &[f64]) -> Vec<f64> {
    probabilities
        .iter()
        .map(|&p| if p >= 0.5 { 1.0 } else { 0.0 })
        .collect()
}

pub fn mse_metric(outputs: &[f64], targets: &[f64]) -> Result<f64> {
    loss(outputs, targets, LossKind::Mse)
}

/// F1 (classification, outputs thresholded at 0.5) or MSE (regression).
pub fn task_metric(task: Task, outputs: &[f64], targets: &[f64]) -> Result<f64> {
    match task {
        Task::BinaryClassification => f1_score(&predict_labels(outputs), targets),
        Task::Regression => mse_metric(outputs, targets),
    }
}

/// Orients a task metric so that lower is better (1 − F1 for classification).
pub fn as_loss(task: Task, metric: f64) -> f64 {
    match task {
        Task::BinaryClassification => 1.0 - metric,
        Task::Regression => metric,
    }
}

/// `GF = mean_i (g(x_i) − f(x_i))²`
pub fn global_fidelity(f: &MlpModel, g: &LinearSurrogate, data: &DenseMatrix) -> Result<f64> {
    if data.rows() == 0 {
        return Err(Error::Invalid(
            "global fidelity needs at least one row".into(),
        ));
    }
    let fo = f.forward_batch(data)?;
    let go = g.predict_batch(data)?;
    loss(&go, &fo, LossKind::PointFidelity)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NeighborhoodKind {
    /// Additive i.i.d. `N(0, sigma2)` noise on every feature.
    Gaussian { sigma2: f64 },
    /// Zeroes `num_patches` random `patch_size × patch_size` squares of a
    /// `height × width` image.
    PatchDelete {
        patch_size: usize,
        num_patches: usize,
        height: usize,
        width: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSpec {
    pub kind: NeighborhoodKind,
    pub count: usize,
    pub seed: u64,
}

impl NeighborhoodSpec {
    pub fn gaussian(sigma2: f64, count: usize, seed: u64) -> Self {
        Self {
            kind: NeighborhoodKind::Gaussian { sigma2 },
            count,
            seed,
        }
    }

    /// 4×4 patches, three per neighbour, on `height × width` images.
    pub fn patches(height: usize, width: usize, count: usize, seed: u64) -> Self {
        Self {
            kind: NeighborhoodKind::PatchDelete {
                patch_size: 4,
                num_patches: 3,
                height,
                width,
            },
            count,
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Invalid("neighbourhood count must be ≥ 1".into()));
        }
        match self.kind {
            NeighborhoodKind::Gaussian { sigma2 } if sigma2.is_nan() || sigma2 <= 0.0 => {
                Err(Error::Invalid(format!("sigma2 must be > 0, got {sigma2}")))
            }
            NeighborhoodKind::PatchDelete {
                patch_size,
                height,
                width,
                ..
            } => {
                ensure_len("patch_delete image size", height * width, dim)?;
                if patch_size == 0 || patch_size > height || patch_size > width {
                    return Err(Error::Invalid(format!(
                        "patch {patch_size}×{patch_size} does not fit a {height}×{width} image"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// `count` perturbed copies of `x`, one per row.
pub fn make_neighborhood(x: &[f64], spec: &NeighborhoodSpec) -> Result<DenseMatrix> {
    spec.validate(x.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = x.len();
    let mut out = DenseMatrix::zeros(spec.count, d);
    for r in 0..spec.count {
        let row = out.row_mut(r);
        row.copy_from_slice(x);
        match spec.kind {
            NeighborhoodKind::Gaussian { sigma2 } => {
                let sd = sigma2.sqrt();
                for v in row.iter_mut() {
                    let e: f64 = rng.sample(StandardNormal);
                    *v += sd * e;
                }
            }
            NeighborhoodKind::PatchDelete {
                patch_size,
                num_patches,
                height,
                width,
            } => {
                for _ in 0..num_patches {
                    let top = rng.random_range(0..=height - patch_size);
                    let left = rng.random_range(0..=width - patch_size);
                    for i in top..top + patch_size {
                        row[i * width + left..i * width + left + patch_size].fill(0.0);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Mean Point Fidelity of `g` against `f` over the neighbourhood of `x`.
pub fn neighborhood_fidelity(
    f: &MlpModel,
    g: &LinearSurrogate,
    x: &[f64],
    spec: &NeighborhoodSpec,
) -> Result<f64> {
    let nb = make_neighborhood(x, spec)?;
    global_fidelity(f, g, &nb)
}

/// Supplies the surrogate used to explain `f` around a given instance.
pub trait SurrogateProvider {
    fn surrogate_for(&self, f: &MlpModel, x: &[f64], index: usize) -> Result<LinearSurrogate>;
}

/// A single global surrogate explains every instance.
impl SurrogateProvider for LinearSurrogate {
    fn surrogate_for(&self, _f: &MlpModel, _x: &[f64], _index: usize) -> Result<LinearSurrogate> {
        Ok(self.clone())
    }
}

/// Global neighbourhood fidelity: neighbourhood fidelity averaged over the rows of
/// `data`. Row `i` uses neighbourhood seed `derive_seed(spec.seed, i)`.
pub fn gnf<P: SurrogateProvider + ?Sized>(
    f: &MlpModel,
    provider: &P,
    data: &DenseMatrix,
    spec: &NeighborhoodSpec,
) -> Result<f64> {
    if data.rows() == 0 {
        return Err(Error::Invalid("GNF needs at least one row".into()));
    }
    let mut total = 0.0;
    for (i, x) in data.iter_rows().enumerate() {
        let g = provider.surrogate_for(f, x, i)?;
        let local = spec.with_seed(derive_seed(spec.seed, i as u64));
        total += neighborhood_fidelity(f, &g, x, &local)?;
    }
    Ok(total / data.rows() as f64)
}
