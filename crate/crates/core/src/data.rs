//! CSV ingestion, missing-value handling, feature scaling and label encoding.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parsed CSV before any cleaning. Feature cells are `None` when empty.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub column_names: Vec<String>,
    pub label_column: String,
    /// Feature column names, in file order, label column removed.
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<Option<f64>>>,
    pub labels: Vec<String>,
}

impl RawTable {
    pub fn rows(&self) -> usize {
        self.features.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn missing_cells(&self) -> usize {
        self.features
            .iter()
            .flatten()
            .filter(|cell| cell.is_none())
            .count()
    }
}

pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column)
}

/// Parses CSV from any reader. Rows are reported 1-based, counting the header.
pub fn read_csv<R: Read>(reader: R, label_column: &str) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let column_names: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let label_idx = column_names
        .iter()
        .position(|c| c == label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_owned()))?;
    let feature_names: Vec<String> = column_names
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, c)| c.clone())
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        let record = record?;
        let row = n + 2;
        if record.len() != column_names.len() {
            return Err(Error::RaggedRow {
                row,
                expected: column_names.len(),
                actual: record.len(),
            });
        }
        let mut cells = Vec::with_capacity(feature_names.len());
        for (i, field) in record.iter().enumerate() {
            if i == label_idx {
                if field.is_empty() {
                    return Err(Error::EmptyLabel { row });
                }
                labels.push(field.to_owned());
            } else if field.is_empty() {
                cells.push(None);
            } else {
                let value: f64 = field.parse().map_err(|_| Error::NonNumericCell {
                    row,
                    column: column_names[i].clone(),
                    value: field.to_owned(),
                })?;
                if !value.is_finite() {
                    return Err(Error::NonNumericCell {
                        row,
                        column: column_names[i].clone(),
                        value: field.to_owned(),
                    });
                }
                cells.push(Some(value));
            }
        }
        features.push(cells);
    }

    Ok(RawTable {
        column_names,
        label_column: label_column.to_owned(),
        feature_names,
        features,
        labels,
    })
}

/// Reads rows of numeric features for inference. `skip_column`, when present
/// in the header, is ignored (so a training file with its label column can be
/// reused). Empty cells are errors: the model stores no imputation values.
pub fn read_feature_rows<R: Read>(
    reader: R,
    skip_column: Option<&str>,
) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let skip = skip_column.and_then(|name| header.iter().position(|c| c == name));
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != skip)
        .map(|(_, c)| c.clone())
        .collect();

    let mut rows = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        let record = record?;
        let row = n + 2;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row,
                expected: header.len(),
                actual: record.len(),
            });
        }
        let values = record
            .iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != skip)
            .map(|(i, field)| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::NonNumericCell {
                        row,
                        column: header[i].clone(),
                        value: field.to_owned(),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    Ok((names, rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    DropRow,
    MeanImpute,
    MedianImpute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    #[default]
    None,
    MinMaxToUnit,
    ZScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PreprocessPolicy {
    pub missing: MissingPolicy,
    pub transform: TransformKind,
}

/// Fitted per-feature scaling, stored with the model so inference sees the
/// same inputs as training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformParams {
    None { dim: usize },
    MinMaxToUnit { min: Vec<f64>, max: Vec<f64> },
    ZScore { mean: Vec<f64>, std: Vec<f64> },
}

impl TransformParams {
    pub fn dim(&self) -> usize {
        match self {
            TransformParams::None { dim } => *dim,
            TransformParams::MinMaxToUnit { min, .. } => min.len(),
            TransformParams::ZScore { mean, .. } => mean.len(),
        }
    }

    pub fn kind(&self) -> TransformKind {
        match self {
            TransformParams::None { .. } => TransformKind::None,
            TransformParams::MinMaxToUnit { .. } => TransformKind::MinMaxToUnit,
            TransformParams::ZScore { .. } => TransformKind::ZScore,
        }
    }

    /// Every transform is `(x - shift) / divisor` per feature. A zero divisor
    /// (constant min-max column) maps the feature to 0.
    pub fn shift_and_divisor(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            TransformParams::None { dim } => (vec![0.0; *dim], vec![1.0; *dim]),
            TransformParams::MinMaxToUnit { min, max } => (
                min.clone(),
                min.iter().zip(max).map(|(lo, hi)| hi - lo).collect(),
            ),
            TransformParams::ZScore { mean, std } => (mean.clone(), std.clone()),
        }
    }

    pub(crate) fn is_consistent(&self) -> bool {
        match self {
            TransformParams::None { .. } => true,
            TransformParams::MinMaxToUnit { min, max } => min.len() == max.len(),
            TransformParams::ZScore { mean, std } => mean.len() == std.len(),
        }
    }
}

#[inline]
pub(crate) fn scale(x: f64, shift: f64, divisor: f64) -> f64 {
    if divisor == 0.0 {
        0.0
    } else {
        (x - shift) / divisor
    }
}

pub fn apply_transform(params: &TransformParams, features: &[f64]) -> Result<Vec<f64>> {
    if features.len() != params.dim() {
        return Err(Error::DimensionMismatch {
            what: "features",
            expected: params.dim(),
            actual: features.len(),
        });
    }
    let out = match params {
        TransformParams::None { .. } => features.to_vec(),
        TransformParams::MinMaxToUnit { min, max } => features
            .iter()
            .zip(min.iter().zip(max))
            .map(|(&x, (&lo, &hi))| scale(x, lo, hi - lo))
            .collect(),
        TransformParams::ZScore { mean, std } => features
            .iter()
            .zip(mean.iter().zip(std))
            .map(|(&x, (&mu, &sd))| scale(x, mu, sd))
            .collect(),
    };
    Ok(out)
}

/// Clean training data ready for fitness evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub transform: TransformParams,
}

impl Dataset {
    /// Builds a dataset from already-clean numeric rows. Labels are encoded in
    /// first-appearance order; no transform is applied.
    pub fn from_rows<S: AsRef<str>>(features: Vec<Vec<f64>>, labels: &[S]) -> Result<Self> {
        let dim = features.first().map_or(0, Vec::len);
        let table = RawTable {
            column_names: (0..dim)
                .map(|i| format!("x{}", i + 1))
                .chain(["label".into()])
                .collect(),
            label_column: "label".into(),
            feature_names: (0..dim).map(|i| format!("x{}", i + 1)).collect(),
            features: features
                .into_iter()
                .map(|row| row.into_iter().map(Some).collect())
                .collect(),
            labels: labels.iter().map(|s| s.as_ref().to_owned()).collect(),
        };
        preprocess(&table, PreprocessPolicy::default())
    }

    pub fn rows(&self) -> usize {
        self.features.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

pub fn preprocess(table: &RawTable, policy: PreprocessPolicy) -> Result<Dataset> {
    let dim = table.feature_count();

    let (mut rows, labels): (Vec<Vec<f64>>, Vec<&str>) = match policy.missing {
        MissingPolicy::DropRow => table
            .features
            .iter()
            .zip(&table.labels)
            .filter_map(|(row, label)| {
                row.iter()
                    .copied()
                    .collect::<Option<Vec<f64>>>()
                    .map(|r| (r, label.as_str()))
            })
            .unzip(),
        MissingPolicy::MeanImpute | MissingPolicy::MedianImpute => {
            let mut fill = Vec::with_capacity(dim);
            for (j, name) in table.feature_names.iter().enumerate() {
                let observed: Vec<f64> = table.features.iter().filter_map(|r| r[j]).collect();
                if observed.is_empty() {
                    if table.rows() == 0 {
                        fill.push(0.0);
                        continue;
                    }
                    return Err(Error::NoObservedValues(name.clone()));
                }
                fill.push(match policy.missing {
                    MissingPolicy::MeanImpute => mean(&observed),
                    _ => median(&observed),
                });
            }
            let rows = table
                .features
                .iter()
                .map(|r| r.iter().zip(&fill).map(|(c, f)| c.unwrap_or(*f)).collect())
                .collect();
            (rows, table.labels.iter().map(String::as_str).collect())
        }
    };

    if rows.len() < 2 {
        return Err(Error::EmptyDataset { rows: rows.len() });
    }

    let mut class_names: Vec<String> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let encoded: Vec<usize> = labels
        .iter()
        .map(|&label| {
            *index.entry(label).or_insert_with(|| {
                class_names.push(label.to_owned());
                class_names.len() - 1
            })
        })
        .collect();
    if class_names.len() < 2 {
        return Err(Error::SingleClass(class_names.swap_remove(0)));
    }

    let transform = fit_transform(&table.feature_names, &rows, policy.transform)?;
    if transform.kind() != TransformKind::None {
        for row in &mut rows {
            *row = apply_transform(&transform, row)?;
        }
    }

    Ok(Dataset {
        feature_names: table.feature_names.clone(),
        features: rows,
        labels: encoded,
        class_names,
        transform,
    })
}

fn fit_transform(
    names: &[String],
    rows: &[Vec<f64>],
    kind: TransformKind,
) -> Result<TransformParams> {
    let dim = names.len();
    let column = |j: usize| rows.iter().map(move |r| r[j]);
    Ok(match kind {
        TransformKind::None => TransformParams::None { dim },
        TransformKind::MinMaxToUnit => TransformParams::MinMaxToUnit {
            min: (0..dim)
                .map(|j| column(j).fold(f64::INFINITY, f64::min))
                .collect(),
            max: (0..dim)
                .map(|j| column(j).fold(f64::NEG_INFINITY, f64::max))
                .collect(),
        },
        TransformKind::ZScore => {
            let n = rows.len() as f64;
            let mut means = Vec::with_capacity(dim);
            let mut stds = Vec::with_capacity(dim);
            for (j, name) in names.iter().enumerate() {
                let mu = column(j).sum::<f64>() / n;
                let var = column(j).map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
                if var == 0.0 {
                    return Err(Error::ZeroVariance(name.clone()));
                }
                means.push(mu);
                stds.push(var.sqrt());
            }
            TransformParams::ZScore {
                mean: means,
                std: stds,
            }
        }
    })
}
