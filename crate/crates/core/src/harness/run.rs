use std::path::Path;

use serde::{Deserialize, Serialize};

use super::spec::{ExperimentSpec, GnfSpec, MetricKind};
use crate::data::{Dataset, SplitTag};
use crate::error::{Error, Result};
use crate::metrics::{gnf, NeighborhoodSpec};
use crate::seeds::{derive_seed, stream};
use crate::trainers::{train, LocalSurrogates, TrainConfig, TrainOutcome, TrainReport};

/// One aggregated cell: a metric of one method over all successful seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub method: String,
    pub metric: String,
    pub mean: f64,
    /// Sample standard deviation; present iff at least two seeds contributed.
    pub std: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

impl ResultsTable {
    pub fn get(&self, method: &str, metric: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.metric == metric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub seed: u64,
    pub report: Option<TrainReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub dataset: String,
    pub table: ResultsTable,
    pub runs: Vec<RunRecord>,
}

impl ExperimentOutcome {
    pub fn failed_runs(&self) -> usize {
        self.runs.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Trains one configuration and fills in GNF when requested.
pub fn run_single(
    ds: &Dataset,
    cfg: &TrainConfig,
    gnf_spec: Option<&GnfSpec>,
) -> Result<TrainOutcome> {
    let mut out = train(ds, cfg)?;
    if let Some(spec) = gnf_spec {
        out.report.final_metrics.gnf = evaluate_gnf(ds, &out, spec, cfg.seed)?;
    }
    Ok(out)
}

fn evaluate_gnf(
    ds: &Dataset,
    out: &TrainOutcome,
    spec: &GnfSpec,
    seed: u64,
) -> Result<Option<f64>> {
    let test = ds.part(SplitTag::Test);
    let rows: Vec<usize> = (0..spec.points.min(test.len())).collect();
    if rows.is_empty() {
        return Err(Error::Invalid("GNF needs a non-empty test split".into()));
    }
    let points = test.x.select_rows(&rows);
    let eval_seed = derive_seed(seed, stream::NEIGHBORHOOD);
    let fit_seed = derive_seed(seed, stream::LOCAL_FIT);
    let (eval_spec, fit_spec) = match ds.image_dims {
        Some((h, w)) => (
            NeighborhoodSpec::patches(h, w, spec.count, eval_seed),
            NeighborhoodSpec::patches(h, w, spec.fit_count, fit_seed),
        ),
        None => (
            NeighborhoodSpec::gaussian(spec.sigma2, spec.count, eval_seed),
            NeighborhoodSpec::gaussian(spec.sigma2, spec.fit_count, fit_seed),
        ),
    };
    if spec.local {
        let provider = LocalSurrogates::new(fit_spec, spec.fit_max_steps);
        Ok(Some(gnf(&out.model, &provider, &points, &eval_spec)?))
    } else {
        match &out.surrogate {
            Some(g) => Ok(Some(gnf(&out.model, g, &points, &eval_spec)?)),
            None => Ok(None),
        }
    }
}

/// Runs every (method, seed) pair of `spec`. A failing run is recorded and the rest
/// continue.
pub fn run_experiment(spec: &ExperimentSpec, base_dir: &Path) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let (name, ds) = spec.dataset.load(base_dir)?;
    let dataset = spec.name.clone().unwrap_or(name);
    let want_gnf = spec.metrics.contains(&MetricKind::Gnf);
    let mut runs = Vec::new();
    for m in &spec.methods {
        for &seed in &spec.seeds {
            let cfg = spec.config_for(m, seed)?;
            let record = match run_single(&ds, &cfg, want_gnf.then_some(&spec.gnf)) {
                Ok(out) => RunRecord {
                    method: out.report.method.clone(),
                    seed,
                    report: Some(out.report),
                    error: None,
                },
                Err(e) => RunRecord {
                    method: m.method.to_string(),
                    seed,
                    report: None,
                    error: Some(e.to_string()),
                },
            };
            runs.push(record);
        }
    }
    let table = aggregate(&dataset, &spec.metrics, ds.task.metric_name(), &runs);
    Ok(ExperimentOutcome {
        dataset,
        table,
        runs,
    })
}

fn aggregate(
    dataset: &str,
    metrics: &[MetricKind],
    task_name: &str,
    runs: &[RunRecord],
) -> ResultsTable {
    let mut methods: Vec<&str> = Vec::new();
    for r in runs {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let mut rows = Vec::new();
    for method in methods {
        let reports: Vec<&TrainReport> = runs
            .iter()
            .filter(|r| r.method == method)
            .filter_map(|r| r.report.as_ref())
            .collect();
        for kind in metrics {
            let (label, values): (&str, Vec<f64>) = match kind {
                MetricKind::Task => (
                    task_name,
                    reports
                        .iter()
                        .map(|r| r.final_metrics.task_metric)
                        .collect(),
                ),
                MetricKind::Gf => (
                    "gf",
                    reports.iter().filter_map(|r| r.final_metrics.gf).collect(),
                ),
                MetricKind::Gnf => (
                    "gnf",
                    reports.iter().filter_map(|r| r.final_metrics.gnf).collect(),
                ),
            };
            if let Some((mean, std)) = mean_std(&values) {
                rows.push(ResultRow {
                    dataset: dataset.to_string(),
                    method: method.to_string(),
                    metric: label.to_string(),
                    mean,
                    std,
                    n: values.len(),
                });
            }
        }
        let failed = runs
            .iter()
            .filter(|r| r.method == method && r.error.is_some())
            .count();
        if failed > 0 {
            rows.push(ResultRow {
                dataset: dataset.to_string(),
                method: method.to_string(),
                metric: "failed".into(),
                mean: failed as f64,
                std: None,
                n: failed,
            });
        }
    }
    ResultsTable { rows }
}

/// Mean and sample standard deviation (n − 1); `None` for no values.
fn mean_std(values: &[f64]) -> Option<(f64, Option<f64>)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.len() >= 2).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1.0)).sqrt()
    });
    Some((mean, std))
}
