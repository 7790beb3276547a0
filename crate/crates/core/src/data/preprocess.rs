//! Standardisation, one-hot encoding and assembly of tabular datasets.

use serde::{Deserialize, Serialize};

use super::{assign_splits, Dataset, RawColumn, RawTable, SplitFractions, SplitTag, Task};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// `(x − mean) / std` with population (1/N) statistics from the training split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: f64,
    pub std: f64,
}

impl Scaler {
    pub fn fit(name: &str, values: &[f64], train_rows: &[usize]) -> Result<Self> {
        if train_rows.is_empty() {
            return Err(Error::Invalid("training split is empty".into()));
        }
        let n = train_rows.len() as f64;
        let mean = train_rows.iter().map(|&i| values[i]).sum::<f64>() / n;
        let var = train_rows
            .iter()
            .map(|&i| (values[i] - mean).powi(2))
            .sum::<f64>()
            / n;
        let std = var.sqrt();
        if std <= 1e-12 * mean.abs().max(1.0) {
            return Err(Error::ZeroVariance(name.to_string()));
        }
        Ok(Self { mean, std })
    }

    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    #[inline]
    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// Standardises one numeric column with statistics taken from `train_rows` only.
pub fn standardize(name: &str, values: &[f64], train_rows: &[usize]) -> Result<(Vec<f64>, Scaler)> {
    let s = Scaler::fit(name, values, train_rows)?;
    Ok((values.iter().map(|&v| s.apply(v)).collect(), s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneHotColumns {
    /// `column=level`, levels in lexicographic order.
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

/// One indicator column per level; `levels` must already be sorted.
pub fn one_hot(name: &str, levels: &[String], codes: &[usize]) -> OneHotColumns {
    let mut columns = vec![vec![0.0; codes.len()]; levels.len()];
    for (row, &c) in codes.iter().enumerate() {
        columns[c][row] = 1.0;
    }
    OneHotColumns {
        names: levels.iter().map(|l| format!("{name}={l}")).collect(),
        columns,
    }
}

fn convert_targets(table: &RawTable, task: Task, positive_label: Option<&str>) -> Result<Vec<f64>> {
    table
        .targets
        .iter()
        .enumerate()
        .map(|(i, raw)| {
            let bad = |msg: &str| Error::Ingest {
                row: i + 1,
                message: format!("target `{raw}` {msg}"),
            };
            match (task, positive_label) {
                (Task::BinaryClassification, Some(pos)) => Ok((raw == pos) as u8 as f64),
                (Task::BinaryClassification, None) => match raw.parse::<f64>() {
                    Ok(v) if v == 0.0 || v == 1.0 => Ok(v),
                    _ => Err(bad("is not 0/1; set positive_label in the schema")),
                },
                (Task::Regression, _) => raw
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad("is not a number")),
            }
        })
        .collect()
}

/// Split, standardise (numeric features and regression targets, train statistics)
/// and one-hot encode a raw table.
pub fn build_tabular(
    table: &RawTable,
    task: Task,
    positive_label: Option<&str>,
    fractions: SplitFractions,
    seed: u64,
) -> Result<Dataset> {
    let mut targets = convert_targets(table, task, positive_label)?;
    let split = assign_splits(
        &targets,
        task == Task::BinaryClassification,
        fractions,
        seed,
    )?;
    let train_rows: Vec<usize> = split
        .iter()
        .enumerate()
        .filter(|(_, t)| **t == SplitTag::Train)
        .map(|(i, _)| i)
        .collect();

    let mut names = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut scalers = Vec::new();
    for (name, col) in &table.columns {
        match col {
            RawColumn::Numeric(values) => {
                let (z, s) = standardize(name, values, &train_rows)?;
                scalers.push((columns.len(), s));
                names.push(name.clone());
                columns.push(z);
            }
            RawColumn::Categorical { levels, codes } => {
                let oh = one_hot(name, levels, codes);
                names.extend(oh.names);
                columns.extend(oh.columns);
            }
        }
    }
    let target_scaler = if task == Task::Regression {
        let (z, s) = standardize(&table.target_name, &targets, &train_rows)?;
        targets = z;
        Some(s)
    } else {
        None
    };

    let n = targets.len();
    let d = columns.len();
    let mut data = vec![0.0; n * d];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            data[i * d + j] = *v;
        }
    }
    let mut ds = Dataset::new(DenseMatrix::new(n, d, data)?, targets, task, names)?;
    ds.split = split;
    ds.scalers = scalers;
    ds.target_scaler = target_scaler;
    Ok(ds)
}
