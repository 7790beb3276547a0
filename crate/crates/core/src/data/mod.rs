//! Dataset ingestion and preprocessing.

mod idx;
mod preprocess;
mod schema;
mod split;
mod synthetic;
mod table;

pub use idx::{binarize_label, load_idx, write_idx_images, write_idx_labels, ImageSet};
pub use preprocess::{build_tabular, one_hot, standardize, OneHotColumns, Scaler};
pub use schema::{DatasetSchema, SourceSpec, SyntheticSpec};
pub use split::{assign_splits, SplitFractions};
pub use synthetic::{make_synthetic, LinearTruth, SyntheticKind};
pub use table::{load_csv, read_csv, ColumnKind, ColumnSpec, RawColumn, RawTable};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::DenseMatrix;
use crate::nn::OutputKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    BinaryClassification,
    Regression,
}

impl Task {
    pub fn output_kind(self) -> OutputKind {
        match self {
            Task::BinaryClassification => OutputKind::BinaryProbability,
            Task::Regression => OutputKind::RegressionScalar,
        }
    }

    /// Name of the task metric reported for this task.
    pub fn metric_name(self) -> &'static str {
        match self {
            Task::BinaryClassification => "f1",
            Task::Regression => "mse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

/// Features and targets of one split.
#[derive(Debug, Clone)]
pub struct Part {
    pub x: DenseMatrix,
    pub y: Vec<f64>,
}

impl Part {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DenseMatrix,
    pub targets: Vec<f64>,
    pub task: Task,
    pub feature_names: Vec<String>,
    pub split: Vec<SplitTag>,
    pub image_dims: Option<(usize, usize)>,
    /// Standardisation applied to numeric feature columns, by feature index.
    pub scalers: Vec<(usize, Scaler)>,
    pub target_scaler: Option<Scaler>,
    /// Generating parameters of linear synthetic data.
    pub truth: Option<LinearTruth>,
}

impl Dataset {
    /// Bare dataset with every row tagged `Train`; checks the cross-field invariants.
    pub fn new(
        features: DenseMatrix,
        targets: Vec<f64>,
        task: Task,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        ensure_len("dataset targets", features.rows(), targets.len())?;
        ensure_len(
            "dataset feature names",
            features.cols(),
            feature_names.len(),
        )?;
        if task == Task::BinaryClassification && targets.iter().any(|&t| t != 0.0 && t != 1.0) {
            return Err(Error::Invalid(
                "classification targets must be 0 or 1".into(),
            ));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("targets"));
        }
        let n = targets.len();
        Ok(Self {
            features,
            targets,
            task,
            feature_names,
            split: vec![SplitTag::Train; n],
            image_dims: None,
            scalers: Vec::new(),
            target_scaler: None,
            truth: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn indices(&self, tag: SplitTag) -> Vec<usize> {
        self.split
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == tag)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn part(&self, tag: SplitTag) -> Part {
        let idx = self.indices(tag);
        Part {
            x: self.features.select_rows(&idx),
            y: idx.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    /// Re-tags rows with a seeded (and, for classification, stratified) split.
    pub fn with_split(mut self, fractions: SplitFractions, seed: u64) -> Result<Self> {
        self.split = assign_splits(
            &self.targets,
            self.task == Task::BinaryClassification,
            fractions,
            seed,
        )?;
        Ok(self)
    }
}
