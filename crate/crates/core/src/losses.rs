//! Batch-mean training losses and their per-example output derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};

/// Probabilities are clamped into `[BCE_CLAMP, 1 - BCE_CLAMP]` before taking logs.
pub const BCE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    BinaryCrossEntropy,
    PointFidelity,
    Distill,
}

fn check(outputs: &[f64], targets: &[f64]) -> Result<()> {
    ensure_len("loss operands", outputs.len(), targets.len())?;
    if outputs.iter().chain(targets).any(|v| v.is_nan()) {
        return Err(Error::NonFinite("loss input"));
    }
    Ok(())
}

fn check_binary_targets(targets: &[f64]) -> Result<()> {
    if targets.iter().any(|&t| t != 0.0 && t != 1.0) {
        return Err(Error::Invalid(
            "binary cross-entropy targets must be 0 or 1".into(),
        ));
    }
    Ok(())
}

#[inline]
fn clamp_prob(p: f64) -> f64 {
    p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP)
}

fn mean_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Batch-mean loss of `outputs` against `targets`.
///
/// For `PointFidelity` and `Distill` the second argument is the other model's outputs.
pub fn loss(outputs: &[f64], targets: &[f64], kind: LossKind) -> Result<f64> {
    check(outputs, targets)?;
    match kind {
        LossKind::Mse | LossKind::PointFidelity | LossKind::Distill => {
            Ok(mean_sq_diff(outputs, targets))
        }
        LossKind::BinaryCrossEntropy => {
            check_binary_targets(targets)?;
            if outputs.is_empty() {
                return Ok(0.0);
            }
            let total: f64 = outputs
                .iter()
                .zip(targets)
                .map(|(&p, &y)| {
                    let p = clamp_prob(p);
                    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
                })
                .sum();
            Ok(total / outputs.len() as f64)
        }
    }
}

pub fn loss_pred(outputs: &[f64], targets: &[f64], kind: LossKind) -> Result<f64> {
    loss(outputs, targets, kind)
}

pub fn loss_point_fidelity(f_out: &[f64], g_out: &[f64]) -> Result<f64> {
    loss(f_out, g_out, LossKind::PointFidelity)
}

pub fn loss_distill(teacher_out: &[f64], student_out: &[f64]) -> Result<f64> {
    loss(student_out, teacher_out, LossKind::Distill)
}

/// `∂ loss(outputs, targets) / ∂ outputs[i]` for the batch-mean loss (so each entry
/// carries the `1/N` factor).
pub fn upstream_derivative(outputs: &[f64], targets: &[f64], kind: LossKind) -> Result<Vec<f64>> {
    check(outputs, targets)?;
    let n = outputs.len().max(1) as f64;
    match kind {
        LossKind::Mse | LossKind::PointFidelity | LossKind::Distill => Ok(outputs
            .iter()
            .zip(targets)
            .map(|(o, t)| 2.0 * (o - t) / n)
            .collect()),
        LossKind::BinaryCrossEntropy => {
            check_binary_targets(targets)?;
            Ok(outputs
                .iter()
                .zip(targets)
                .map(|(&p, &y)| {
                    let p = clamp_prob(p);
                    (-y / p + (1.0 - y) / (1.0 - p)) / n
                })
                .collect())
        }
    }
}
