//! Two-objective MGDA: min-norm convex combination of the predictive and fidelity
//! gradients, plus Pareto stationarity and dominance checks.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{dot, norm_sq};
use crate::nn::GradientVector;

/// Denominators `‖g_pred − g_pf‖²` at or below this are treated as zero.
pub const DENOMINATOR_FLOOR: f64 = 1e-24;

pub const DEFAULT_STATIONARITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSolution {
    /// Weight on the predictive gradient, in `[0, 1]`.
    pub alpha: f64,
    /// `‖α g_pred + (1 − α) g_pf‖₂`
    pub combined_norm: f64,
    /// The unconstrained minimiser fell outside `[0, 1]`.
    pub clipped: bool,
}

/// Objective values of one solution, lower is better in every component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricPoint(pub Vec<f64>);

/// Minimises `‖α g_pred + (1 − α) g_pf‖²` over `α ∈ [0, 1]` in closed form.
pub fn solve_alpha(g_pred: &[f64], g_pf: &[f64]) -> Result<AlphaSolution> {
    ensure_len("solve_alpha", g_pred.len(), g_pf.len())?;
    if g_pred.iter().chain(g_pf).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("solve_alpha gradients"));
    }
    // (g_pf − g_pred)·g_pf and ‖g_pred − g_pf‖² without materialising the difference.
    let mut num = 0.0;
    let mut den = 0.0;
    for (&a, &b) in g_pred.iter().zip(g_pf) {
        let d = b - a;
        num += d * b;
        den += d * d;
    }
    let (alpha, clipped) = if den <= DENOMINATOR_FLOOR {
        (0.5, false)
    } else {
        let raw = num / den;
        (raw.clamp(0.0, 1.0), !(0.0..=1.0).contains(&raw))
    };
    let combined_norm = combined_norm_sq(alpha, g_pred, g_pf).sqrt();
    Ok(AlphaSolution {
        alpha,
        combined_norm,
        clipped,
    })
}

fn combined_norm_sq(alpha: f64, g_pred: &[f64], g_pf: &[f64]) -> f64 {
    g_pred
        .iter()
        .zip(g_pf)
        .map(|(a, b)| {
            let c = alpha * a + (1.0 - alpha) * b;
            c * c
        })
        .sum()
}

/// `α g_pred + (1 − α) g_pf`, elementwise.
pub fn combine_direction(alpha: f64, g_pred: &[f64], g_pf: &[f64]) -> Result<GradientVector> {
    ensure_len("combine_direction", g_pred.len(), g_pf.len())?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Invalid(format!("alpha {alpha} outside [0, 1]")));
    }
    if alpha == 1.0 {
        return Ok(g_pred.to_vec().into());
    }
    if alpha == 0.0 {
        return Ok(g_pf.to_vec().into());
    }
    Ok(g_pred
        .iter()
        .zip(g_pf)
        .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
        .collect::<Vec<_>>()
        .into())
}

/// True when the min-norm convex combination of the two gradients is within `tol` of zero.
pub fn is_pareto_stationary(g_pred: &[f64], g_pf: &[f64], tol: f64) -> Result<bool> {
    Ok(solve_alpha(g_pred, g_pf)?.combined_norm <= tol)
}

/// Pareto dominance for minimisation: `a ≤ b` everywhere and `a < b` somewhere.
pub fn dominates(a: &MetricPoint, b: &MetricPoint) -> Result<bool> {
    ensure_len("dominates arity", a.0.len(), b.0.len())?;
    let mut strictly = false;
    for (x, y) in a.0.iter().zip(&b.0) {
        if x > y {
            return Ok(false);
        }
        if x < y {
            strictly = true;
        }
    }
    Ok(strictly)
}

/// For each point, whether any other point dominates it.
pub fn dominated_flags(points: &[MetricPoint]) -> Result<Vec<bool>> {
    let mut flags = vec![false; points.len()];
    for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i != j && dominates(q, p)? {
                flags[i] = true;
                break;
            }
        }
    }
    Ok(flags)
}

/// Inner products `(d·g_pred, d·g_pf)` of a direction with both objective gradients.
pub fn descent_products(d: &[f64], g_pred: &[f64], g_pf: &[f64]) -> (f64, f64) {
    (dot(d, g_pred), dot(d, g_pf))
}

pub fn gradient_norm(g: &[f64]) -> f64 {
    norm_sq(g).sqrt()
}
