use std::path::Path;

use serde::{Deserialize, Serialize};

use super::spec::{ExperimentSpec, MethodSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::as_loss;
use crate::moo::{dominated_flags, MetricPoint};
use crate::trainers::{train, Method, TrainConfig};

/// The grid-search weights 0.1, 0.2, …, 0.9.
pub const PARETO_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub seed: u64,
    pub label: String,
    /// Fixed weight for grid-search points; absent for MOO.
    pub alpha: Option<f64>,
    pub task_metric: f64,
    /// Task metric as a loss (1 − F1, or MSE).
    pub task_loss: f64,
    pub gf: f64,
    pub dominated: bool,
}

/// Trains every grid weight plus MOO under `cfg.seed` and flags dominated points in
/// (task loss, GF).
pub fn pareto_scan(ds: &Dataset, cfg: &TrainConfig) -> Result<Vec<ScatterPoint>> {
    let methods = PARETO_GRID
        .iter()
        .map(|&a| (Method::Gs(a), Some(a)))
        .chain(std::iter::once((Method::Moo, None)));
    let mut points = Vec::new();
    for (method, alpha) in methods {
        let out = train(ds, &cfg.clone().with_method(method))?;
        let fm = &out.report.final_metrics;
        let gf = fm
            .gf
            .ok_or_else(|| Error::Invalid(format!("{method} produced no surrogate")))?;
        points.push(ScatterPoint {
            seed: cfg.seed,
            label: method.to_string(),
            alpha,
            task_metric: fm.task_metric,
            task_loss: as_loss(ds.task, fm.task_metric),
            gf,
            dominated: false,
        });
    }
    let metric_points: Vec<MetricPoint> = points
        .iter()
        .map(|p| MetricPoint(vec![p.task_loss, p.gf]))
        .collect();
    for (p, d) in points.iter_mut().zip(dominated_flags(&metric_points)?) {
        p.dominated = d;
    }
    Ok(points)
}

/// [`pareto_scan`] for every seed of `spec`, configured by its `defaults` table.
pub fn pareto_scan_spec(spec: &ExperimentSpec, base_dir: &Path) -> Result<Vec<ScatterPoint>> {
    let (_, ds) = spec.dataset.load(base_dir)?;
    let base = MethodSpec {
        method: Method::Moo,
        overrides: toml::Table::new(),
    };
    let mut all = Vec::new();
    for &seed in &spec.seeds {
        all.extend(pareto_scan(&ds, &spec.config_for(&base, seed)?)?);
    }
    Ok(all)
}
