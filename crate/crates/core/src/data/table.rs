//! Typed CSV ingestion.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    /// Declared levels are enforced; when absent they are collected from the file.
    Categorical {
        #[serde(default)]
        levels: Option<Vec<String>>,
    },
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn numeric(name: &str) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Numeric,
        }
    }

    pub fn categorical(name: &str, levels: Option<&[&str]>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Categorical {
                levels: levels.map(|l| l.iter().map(|s| s.to_string()).collect()),
            },
        }
    }

    pub fn target(name: &str) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Target,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawColumn {
    Numeric(Vec<f64>),
    /// `levels` sorted lexicographically; `codes[i]` indexes into it.
    Categorical {
        levels: Vec<String>,
        codes: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    /// Feature columns in schema order.
    pub columns: Vec<(String, RawColumn)>,
    pub target_name: String,
    pub targets: Vec<String>,
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty()
        || cell == "?"
        || cell.eq_ignore_ascii_case("na")
        || cell.eq_ignore_ascii_case("nan")
}

pub fn load_csv(path: &Path, schema: &[ColumnSpec], max_rows: Option<usize>) -> Result<RawTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema, max_rows)
}

/// Reads a header-first CSV. Row numbers in errors are 1-based data rows (the
/// header is not counted).
pub fn read_csv<R: Read>(
    reader: R,
    schema: &[ColumnSpec],
    max_rows: Option<usize>,
) -> Result<RawTable> {
    let targets_declared = schema
        .iter()
        .filter(|c| c.kind == ColumnKind::Target)
        .count();
    if targets_declared != 1 {
        return Err(Error::Config(format!(
            "schema must declare exactly one target column, found {targets_declared}"
        )));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Ingest {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    let positions: Vec<usize> = schema
        .iter()
        .map(|c| {
            header
                .iter()
                .position(|h| h == c.name)
                .ok_or_else(|| Error::Ingest {
                    row: 0,
                    message: format!("column `{}` missing from header", c.name),
                })
        })
        .collect::<Result<_>>()?;

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); schema.len()];
    for (i, rec) in rdr.records().enumerate() {
        if max_rows.is_some_and(|m| i >= m) {
            break;
        }
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Ingest {
            row,
            message: e.to_string(),
        })?;
        for (k, (&pos, spec)) in positions.iter().zip(schema).enumerate() {
            let cell = rec.get(pos).unwrap_or("");
            if is_missing(cell) {
                return Err(Error::Ingest {
                    row,
                    message: format!("missing value in column `{}`", spec.name),
                });
            }
            cells[k].push(cell.to_string());
        }
    }

    let mut columns = Vec::new();
    let mut targets = Vec::new();
    let mut target_name = String::new();
    for (spec, values) in schema.iter().zip(cells) {
        match &spec.kind {
            ColumnKind::Target => {
                target_name = spec.name.clone();
                targets = values;
            }
            ColumnKind::Numeric => {
                let parsed = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| Error::Ingest {
                                row: i + 1,
                                message: format!(
                                    "`{v}` in numeric column `{}` is not a number",
                                    spec.name
                                ),
                            })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                columns.push((spec.name.clone(), RawColumn::Numeric(parsed)));
            }
            ColumnKind::Categorical { levels } => {
                let level_set: BTreeSet<String> = match levels {
                    Some(l) => l.iter().cloned().collect(),
                    None => values.iter().cloned().collect(),
                };
                let levels: Vec<String> = level_set.into_iter().collect();
                let codes = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        levels.binary_search(v).map_err(|_| Error::Ingest {
                            row: i + 1,
                            message: format!("unknown level `{v}` in column `{}`", spec.name),
                        })
                    })
                    .collect::<Result<Vec<usize>>>()?;
                columns.push((spec.name.clone(), RawColumn::Categorical { levels, codes }));
            }
        }
    }
    Ok(RawTable {
        columns,
        target_name,
        targets,
    })
}
