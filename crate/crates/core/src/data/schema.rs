//! Dataset schema files (TOML key-value records).
//!
//! ```toml
//! task = "binary_classification"    # or "regression"
//! positive_label = ">50K"           # classification targets that are not 0/1
//! max_rows = 5000                   # optional
//!
//! [source]
//! kind = "csv"
//! path = "adult.csv"                # relative to the schema file
//!
//! [[columns]]
//! name = "age"
//! kind = "numeric"
//!
//! [[columns]]
//! name = "workclass"
//! kind = "categorical"              # optional: levels = ["Private", ...]
//!
//! [[columns]]
//! name = "income"
//! kind = "target"
//!
//! [split]                           # optional, defaults shown
//! train = 0.7
//! val = 0.15
//! seed = 0
//! ```
//!
//! `source.kind = "idx"` takes `images`, `labels` and `target_digit`;
//! `source.kind = "synthetic"` takes `generator`, `n`, `d`, `noise` and `seed`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    binarize_label, build_tabular, load_csv, load_idx, make_synthetic, ColumnSpec, Dataset,
    SplitFractions, SyntheticKind, Task,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Csv {
        path: PathBuf,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
        target_digit: u8,
    },
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub generator: SyntheticKind,
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    #[serde(default = "default_train")]
    pub train: f64,
    #[serde(default = "default_val")]
    pub val: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_train() -> f64 {
    0.7
}

fn default_val() -> f64 {
    0.15
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: default_train(),
            val: default_val(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    #[serde(default)]
    pub name: Option<String>,
    /// Required for CSV sources; IDX is always classification and synthetic
    /// data carries its own task.
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default)]
    pub positive_label: Option<String>,
    #[serde(default)]
    pub max_rows: Option<usize>,
    pub source: SourceSpec,
    #[serde(default)]
    pub columns: Vec<ColumnSpec>,
    #[serde(default)]
    pub split: SplitSpec,
}

impl DatasetSchema {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn fractions(&self) -> SplitFractions {
        SplitFractions {
            train: self.split.train,
            val: self.split.val,
        }
    }

    /// Loads and preprocesses the dataset; relative paths resolve against `base_dir`.
    pub fn load(&self, base_dir: &Path) -> Result<Dataset> {
        let resolve = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base_dir.join(p)
            }
        };
        match &self.source {
            SourceSpec::Csv { path } => {
                let task = self
                    .task
                    .ok_or_else(|| Error::Config("csv schema needs `task`".into()))?;
                let table = load_csv(&resolve(path), &self.columns, self.max_rows)?;
                build_tabular(
                    &table,
                    task,
                    self.positive_label.as_deref(),
                    self.fractions(),
                    self.split.seed,
                )
            }
            SourceSpec::Idx {
                images,
                labels,
                target_digit,
            } => {
                let mut set = load_idx(&resolve(images), &resolve(labels))?;
                if let Some(m) = self.max_rows.filter(|&m| m < set.labels.len()) {
                    let idx: Vec<usize> = (0..m).collect();
                    set.pixels = set.pixels.select_rows(&idx);
                    set.labels.truncate(m);
                }
                binarize_label(&set, *target_digit, self.fractions(), self.split.seed)
            }
            SourceSpec::Synthetic(s) => {
                let ds = make_synthetic(s.generator, s.n, s.d, s.noise, s.seed)?;
                if self.split == SplitSpec::default() {
                    Ok(ds)
                } else {
                    ds.with_split(self.fractions(), self.split.seed)
                }
            }
        }
    }
}
