//! Experiment spec files (TOML).
//!
//! ```toml
//! name = "synthetic-grid"
//! dataset = "synthetic.toml"   # schema path relative to this file, or an inline [dataset] table
//! seeds = [0, 1, 2]
//! metrics = ["task", "gf", "gnf"]
//! out_dir = "results"          # optional, relative to this file
//!
//! [defaults]                   # any TrainConfig field
//! max_epochs = 50
//! hidden = [32, 32]
//!
//! [[methods]]
//! method = "moo"
//!
//! [[methods]]
//! method = "gs:0.3"
//! lr_theta = 0.002             # per-method overrides
//!
//! [gnf]                        # optional, defaults shown
//! points = 50
//! count = 10
//! sigma2 = 0.1
//! local = true
//! fit_count = 100
//! fit_max_steps = 20000
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, DatasetSchema};
use crate::error::{Error, Result};
use crate::trainers::{Method, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetRef {
    Path(PathBuf),
    Inline(Box<DatasetSchema>),
}

impl DatasetRef {
    /// Loads the dataset; relative paths resolve against `base_dir`.
    pub fn load(&self, base_dir: &Path) -> Result<(String, Dataset)> {
        match self {
            DatasetRef::Path(p) => {
                let path = base_dir.join(p);
                let schema = DatasetSchema::from_file(&path)?;
                let dir = path.parent().unwrap_or(Path::new("."));
                let name = schema.name.clone().unwrap_or_else(|| {
                    path.file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "dataset".into())
                });
                Ok((name, schema.load(dir)?))
            }
            DatasetRef::Inline(schema) => {
                let name = schema.name.clone().unwrap_or_else(|| "dataset".into());
                Ok((name, schema.load(base_dir)?))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// F1 for classification, MSE for regression.
    Task,
    Gf,
    Gnf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    #[serde(flatten)]
    pub overrides: toml::Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GnfSpec {
    /// Leading test rows to explain.
    pub points: usize,
    pub count: usize,
    pub sigma2: f64,
    /// Per-instance local surrogates; otherwise the run's global surrogate.
    pub local: bool,
    pub fit_count: usize,
    pub fit_max_steps: usize,
}

impl Default for GnfSpec {
    fn default() -> Self {
        Self {
            points: 50,
            count: 10,
            sigma2: 0.1,
            local: true,
            fit_count: 100,
            fit_max_steps: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub dataset: DatasetRef,
    pub methods: Vec<MethodSpec>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricKind>,
    #[serde(default)]
    pub gnf: GnfSpec,
    #[serde(default)]
    pub defaults: toml::Table,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_metrics() -> Vec<MetricKind> {
    vec![MetricKind::Task, MetricKind::Gf]
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("experiment needs at least one method".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("experiment needs at least one seed".into()));
        }
        if self.gnf.points == 0 || self.gnf.count == 0 || self.gnf.fit_count == 0 {
            return Err(Error::Config("gnf points and counts must be ≥ 1".into()));
        }
        if self.gnf.sigma2.is_nan() || self.gnf.sigma2 <= 0.0 {
            return Err(Error::Config("gnf sigma2 must be > 0".into()));
        }
        for m in &self.methods {
            self.config_for(m, 0)?;
        }
        Ok(())
    }

    /// `defaults`, then the method's overrides, then method and seed.
    pub fn config_for(&self, method: &MethodSpec, seed: u64) -> Result<TrainConfig> {
        let mut table = self.defaults.clone();
        for (k, v) in &method.overrides {
            table.insert(k.clone(), v.clone());
        }
        let cfg: TrainConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let cfg = cfg.with_method(method.method).with_seed(seed);
        cfg.validate()?;
        Ok(cfg)
    }
}
