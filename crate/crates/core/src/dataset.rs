//! Matrix types, the dataset container, CSV ingestion, standardization,
//! fold assignment and fuzzy/logical label conversion.
//!
//! On disk a dataset is a headered CSV with feature columns first and label
//! columns last, plus a sidecar JSON descriptor next to it
//! (`data.csv` + `data.json`):
//!
//! ```json
//! { "label_cols": 1, "mode": "single" }
//! ```
//!
//! In single-label mode a single label column is read as a categorical target
//! and one-hot encoded; several label columns must already be one-hot. In
//! multi-label mode every label column must hold 0 or 1. Known fuzzy labels
//! live in a parallel `data.fuzzy.csv` with one column per label.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelMode {
    Single,
    Multi,
}

impl fmt::Display for LabelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelMode::Single => f.write_str("single"),
            LabelMode::Multi => f.write_str("multi"),
        }
    }
}

/// N×D matrix of finite feature values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix(Array2<f64>);

impl FeatureMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::EmptyInput("feature matrix needs at least one row and one column"));
        }
        if let Some(((r, c), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "feature value {v} at ({r}, {c}) is not finite"
            )));
        }
        Ok(FeatureMatrix(values))
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }

    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix(self.0.select(Axis(0), indices))
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

/// N×L matrix of 0/1 label indicators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalLabelMatrix(Array2<u8>);

impl LogicalLabelMatrix {
    pub fn new(values: Array2<u8>) -> Result<Self> {
        if values.ncols() == 0 {
            return Err(Error::EmptyInput("label matrix needs at least one column"));
        }
        if let Some(((r, c), v)) = values.indexed_iter().find(|(_, v)| **v > 1) {
            return Err(Error::Validation(format!(
                "logical label {v} at ({r}, {c}) is not 0 or 1"
            )));
        }
        Ok(LogicalLabelMatrix(values))
    }

    /// One-hot matrix with `n_classes` columns from per-row class indices.
    pub fn from_classes(classes: &[usize], n_classes: usize) -> Result<Self> {
        let mut values = Array2::zeros((classes.len(), n_classes));
        for (i, &c) in classes.iter().enumerate() {
            if c >= n_classes {
                return Err(Error::Validation(format!(
                    "class index {c} out of range for {n_classes} classes"
                )));
            }
            values[[i, c]] = 1;
        }
        LogicalLabelMatrix::new(values)
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, u8> {
        self.0.view()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.0[[row, col]] == 1
    }

    pub fn is_one_hot(&self) -> bool {
        self.0
            .rows()
            .into_iter()
            .all(|r| r.iter().map(|&v| v as usize).sum::<usize>() == 1)
    }

    /// Column index of the first 1 in every row (the class in single-label
    /// mode); rows without any 1 map to 0.
    pub fn class_indices(&self) -> Vec<usize> {
        self.0
            .rows()
            .into_iter()
            .map(|r| r.iter().position(|&v| v == 1).unwrap_or(0))
            .collect()
    }

    pub fn to_f64(&self) -> Array2<f64> {
        self.0.mapv(f64::from)
    }

    pub fn select_rows(&self, indices: &[usize]) -> LogicalLabelMatrix {
        LogicalLabelMatrix(self.0.select(Axis(0), indices))
    }

    pub fn into_inner(self) -> Array2<u8> {
        self.0
    }
}

/// N×L matrix of membership degrees in [0, 1]. Rows are not required to sum
/// to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyLabelMatrix(Array2<f64>);

impl FuzzyLabelMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.ncols() == 0 {
            return Err(Error::EmptyInput("fuzzy label matrix needs at least one column"));
        }
        if let Some(((r, c), v)) = values
            .indexed_iter()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(Error::Validation(format!(
                "fuzzy label {v} at ({r}, {c}) is outside [0, 1]"
            )));
        }
        Ok(FuzzyLabelMatrix(values))
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }

    pub fn select_rows(&self, indices: &[usize]) -> FuzzyLabelMatrix {
        FuzzyLabelMatrix(self.0.select(Axis(0), indices))
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

impl From<&LogicalLabelMatrix> for FuzzyLabelMatrix {
    fn from(logical: &LogicalLabelMatrix) -> Self {
        FuzzyLabelMatrix(logical.to_f64())
    }
}

/// Instances with their logical labels and, when known, their fuzzy labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    mode: LabelMode,
    features: FeatureMatrix,
    logical: LogicalLabelMatrix,
    fuzzy: Option<FuzzyLabelMatrix>,
    feature_names: Vec<String>,
    label_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        mode: LabelMode,
        features: FeatureMatrix,
        logical: LogicalLabelMatrix,
        fuzzy: Option<FuzzyLabelMatrix>,
    ) -> Result<Self> {
        let feature_names = (1..=features.ncols()).map(|i| format!("x{i}")).collect();
        let label_names = (1..=logical.ncols()).map(|i| format!("y{i}")).collect();
        Dataset::with_names(name, mode, features, logical, fuzzy, feature_names, label_names)
    }

    pub fn with_names(
        name: impl Into<String>,
        mode: LabelMode,
        features: FeatureMatrix,
        logical: LogicalLabelMatrix,
        fuzzy: Option<FuzzyLabelMatrix>,
        feature_names: Vec<String>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() != logical.nrows() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} label rows",
                features.nrows(),
                logical.nrows()
            )));
        }
        if let Some(f) = &fuzzy {
            if f.nrows() != logical.nrows() || f.ncols() != logical.ncols() {
                return Err(Error::Shape(format!(
                    "fuzzy labels are {}x{}, logical labels {}x{}",
                    f.nrows(),
                    f.ncols(),
                    logical.nrows(),
                    logical.ncols()
                )));
            }
        }
        if mode == LabelMode::Single && !logical.is_one_hot() {
            return Err(Error::Validation(
                "single-label dataset has a label row that is not one-hot".into(),
            ));
        }
        if feature_names.len() != features.ncols() || label_names.len() != logical.ncols() {
            return Err(Error::Shape("column name count does not match matrix width".into()));
        }
        Ok(Dataset {
            name: name.into(),
            mode,
            features,
            logical,
            fuzzy,
            feature_names,
            label_names,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mode(&self) -> LabelMode {
        self.mode
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn logical(&self) -> &LogicalLabelMatrix {
        &self.logical
    }

    pub fn fuzzy(&self) -> Option<&FuzzyLabelMatrix> {
        self.fuzzy.as_ref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label_count(&self) -> usize {
        self.logical.ncols()
    }

    pub fn with_fuzzy(mut self, fuzzy: FuzzyLabelMatrix) -> Result<Self> {
        if fuzzy.nrows() != self.len() || fuzzy.ncols() != self.label_count() {
            return Err(Error::Shape(format!(
                "fuzzy labels are {}x{}, dataset is {}x{}",
                fuzzy.nrows(),
                fuzzy.ncols(),
                self.len(),
                self.label_count()
            )));
        }
        self.fuzzy = Some(fuzzy);
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Rows `indices` (in that order) as a new dataset.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            mode: self.mode,
            features: self.features.select_rows(indices),
            logical: self.logical.select_rows(indices),
            fuzzy: self.fuzzy.as_ref().map(|f| f.select_rows(indices)),
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
        }
    }
}

/// Sidecar descriptor stored next to a dataset CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvDescriptor {
    pub label_cols: usize,
    pub mode: LabelMode,
}

/// `data.csv` → `data.json`.
pub fn descriptor_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// `data.csv` → `data.fuzzy.csv`.
pub fn fuzzy_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("fuzzy.csv")
}

pub fn read_descriptor(csv_path: &Path) -> Result<CsvDescriptor> {
    let path = descriptor_path(csv_path);
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_reader(file)?)
}

pub fn write_descriptor(csv_path: &Path, descriptor: &CsvDescriptor) -> Result<()> {
    let path = descriptor_path(csv_path);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::to_writer(file, descriptor)?;
    Ok(())
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

fn parse_finite(raw: &str, row: usize, col: usize, headers: &[String]) -> Result<f64> {
    let trimmed = raw.trim();
    match trimmed.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            row,
            col: col + 1,
            column: headers.get(col).cloned().unwrap_or_default(),
            value: raw.to_string(),
        }),
    }
}

/// Reads a dataset CSV using an explicit descriptor. A `<stem>.fuzzy.csv`
/// next to the file is not picked up here; see [`load_dataset`].
pub fn load_csv(path: &Path, descriptor: &CsvDescriptor) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let n_cols = headers.len();
    let label_cols = descriptor.label_cols;
    if label_cols == 0 || label_cols >= n_cols {
        return Err(Error::Validation(format!(
            "descriptor asks for {label_cols} label columns but the file has {n_cols} columns"
        )));
    }
    let n_features = n_cols - label_cols;

    let mut feature_values = Vec::new();
    let mut raw_labels: Vec<Vec<String>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != n_cols {
            return Err(Error::Validation(format!(
                "row {row} has {} fields, expected {n_cols}",
                record.len()
            )));
        }
        for (c, raw) in record.iter().take(n_features).enumerate() {
            feature_values.push(parse_finite(raw, row, c, &headers)?);
        }
        raw_labels.push(record.iter().skip(n_features).map(|s| s.trim().to_string()).collect());
    }
    let n = raw_labels.len();
    if n == 0 {
        return Err(Error::EmptyInput("CSV file has no data rows"));
    }
    let features = FeatureMatrix::new(
        Array2::from_shape_vec((n, n_features), feature_values)
            .map_err(|e| Error::Shape(e.to_string()))?,
    )?;
    let feature_names = headers[..n_features].to_vec();

    let (logical, label_names) = if descriptor.mode == LabelMode::Single && label_cols == 1 {
        encode_categorical(&raw_labels)
    } else {
        let mut values = Array2::<u8>::zeros((n, label_cols));
        for (r, labels) in raw_labels.iter().enumerate() {
            for (c, raw) in labels.iter().enumerate() {
                let col = n_features + c;
                let v = parse_finite(raw, r + 1, col, &headers)?;
                if v == 0.0 {
                    values[[r, c]] = 0;
                } else if v == 1.0 {
                    values[[r, c]] = 1;
                } else {
                    return Err(Error::Validation(format!(
                        "label value {raw:?} at row {}, column {} ({}) is not 0 or 1",
                        r + 1,
                        col + 1,
                        headers[col]
                    )));
                }
            }
        }
        let logical = LogicalLabelMatrix::new(values)?;
        if descriptor.mode == LabelMode::Single {
            if let Some(r) = logical
                .view()
                .rows()
                .into_iter()
                .position(|row| row.iter().map(|&v| v as usize).sum::<usize>() != 1)
            {
                return Err(Error::Validation(format!(
                    "single-label row {} is not one-hot",
                    r + 1
                )));
            }
        }
        (logical, headers[n_features..].to_vec())
    };

    Dataset::with_names(
        dataset_name(path),
        descriptor.mode,
        features,
        logical,
        None,
        feature_names,
        label_names,
    )
}

/// Class names are ordered numerically when every value parses as a number,
/// lexicographically otherwise.
fn encode_categorical(raw: &[Vec<String>]) -> (LogicalLabelMatrix, Vec<String>) {
    let distinct: BTreeSet<&str> = raw.iter().map(|r| r[0].as_str()).collect();
    let mut classes: Vec<&str> = distinct.into_iter().collect();
    let numeric: Option<Vec<f64>> = classes.iter().map(|c| c.parse::<f64>().ok()).collect();
    if let Some(keys) = numeric {
        let mut paired: Vec<(f64, &str)> = keys.into_iter().zip(classes.iter().copied()).collect();
        paired.sort_by(|a, b| a.0.total_cmp(&b.0));
        classes = paired.into_iter().map(|(_, c)| c).collect();
    }
    let indices: Vec<usize> = raw
        .iter()
        .map(|r| classes.iter().position(|c| *c == r[0]).unwrap_or(0))
        .collect();
    let logical = LogicalLabelMatrix::from_classes(&indices, classes.len())
        .expect("indices are in range by construction");
    (logical, classes.into_iter().map(String::from).collect())
}

/// Loads `path` with its sidecar descriptor, attaching `<stem>.fuzzy.csv`
/// when it exists.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let descriptor = read_descriptor(path)?;
    let dataset = load_csv(path, &descriptor)?;
    let fuzzy_file = fuzzy_path(path);
    if fuzzy_file.exists() {
        let fuzzy = load_fuzzy_csv(&fuzzy_file)?;
        dataset.with_fuzzy(fuzzy)
    } else {
        Ok(dataset)
    }
}

/// Writes the dataset CSV, its descriptor and, if present, its fuzzy labels.
/// Single-label datasets are written with one categorical label column.
pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    let single = dataset.mode() == LabelMode::Single;

    let mut header: Vec<String> = dataset.feature_names().to_vec();
    if single {
        header.push("class".into());
    } else {
        header.extend(dataset.label_names().iter().cloned());
    }
    writer.write_record(&header)?;

    let classes = dataset.logical().class_indices();
    for (i, &class) in classes.iter().enumerate() {
        let mut record: Vec<String> = dataset.features().row(i).iter().map(|v| v.to_string()).collect();
        if single {
            record.push(dataset.label_names()[class].clone());
        } else {
            record.extend(dataset.logical().view().row(i).iter().map(|v| v.to_string()));
        }
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;

    let label_cols = if single { 1 } else { dataset.label_count() };
    write_descriptor(
        path,
        &CsvDescriptor {
            label_cols,
            mode: dataset.mode(),
        },
    )?;
    if let Some(fuzzy) = dataset.fuzzy() {
        save_fuzzy_csv(fuzzy.view(), dataset.label_names(), &fuzzy_path(path))?;
    }
    Ok(())
}

/// Formats a value with at most six significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.5e}").parse().unwrap_or(v);
    rounded.to_string()
}

/// Membership values written at six significant digits, one column per label.
pub fn save_fuzzy_csv(values: ArrayView2<'_, f64>, label_names: &[String], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(label_names)?;
    for row in values.rows() {
        writer.write_record(row.iter().map(|&v| format_sig6(v)))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn load_fuzzy_csv(path: &Path) -> Result<FuzzyLabelMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    let width = headers.len();
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != width {
            return Err(Error::Validation(format!(
                "fuzzy row {} has {} fields, expected {width}",
                i + 1,
                record.len()
            )));
        }
        for (c, raw) in record.iter().enumerate() {
            values.push(parse_finite(raw, i + 1, c, &headers)?);
        }
        rows += 1;
    }
    FuzzyLabelMatrix::new(
        Array2::from_shape_vec((rows, width), values).map_err(|e| Error::Shape(e.to_string()))?,
    )
}

/// Per-column shift and scale fitted on one feature matrix and reusable on
/// another (test folds are transformed with the training fold's parameters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Array1<f64>,
    /// Population standard deviation; 0 marks a constant column.
    pub std: Array1<f64>,
}

impl Standardizer {
    pub fn fit(features: &FeatureMatrix) -> Result<Self> {
        let n = features.nrows();
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "standardization needs at least 2 rows, got {n}"
            )));
        }
        let x = features.view();
        let mean = x.mean_axis(Axis(0)).expect("n >= 2");
        let mut std = x.var_axis(Axis(0), 0.0).mapv(f64::sqrt);
        for (s, m) in std.iter_mut().zip(mean.iter()) {
            if *s <= 1e-12 * m.abs().max(1.0) {
                *s = 0.0;
            }
        }
        Ok(Standardizer { mean, std })
    }

    pub fn transform(&self, features: &FeatureMatrix) -> Result<FeatureMatrix> {
        if features.ncols() != self.mean.len() {
            return Err(Error::Shape(format!(
                "standardizer fitted on {} columns, got {}",
                self.mean.len(),
                features.ncols()
            )));
        }
        let mut out = features.view().to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.mean[j], self.std[j]);
            if s == 0.0 {
                col.fill(0.0);
            } else {
                col.mapv_inplace(|v| (v - m) / s);
            }
        }
        FeatureMatrix::new(out)
    }
}

/// Zero-mean, unit-variance columns plus the fitted parameters.
pub fn standardize(features: &FeatureMatrix) -> Result<(FeatureMatrix, Standardizer)> {
    let scaler = Standardizer::fit(features)?;
    let out = scaler.transform(features)?;
    Ok((out, scaler))
}

/// Assignment of every instance to exactly one of `fold_count` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold_count: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldSplit {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.fold_count];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// Stratified split for single-label datasets, plain split otherwise.
    pub fn for_dataset(dataset: &Dataset, fold_count: usize, seed: u64) -> Result<Self> {
        match dataset.mode() {
            LabelMode::Single => {
                stratified_kfold_split(&dataset.logical().class_indices(), fold_count, seed)
            }
            LabelMode::Multi => kfold_split(dataset.len(), fold_count, seed),
        }
    }
}

fn check_folds(n: usize, fold_count: usize) -> Result<()> {
    if fold_count < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 folds, got {fold_count}"
        )));
    }
    if n < fold_count {
        return Err(Error::InvalidParameter(format!(
            "{n} instances cannot fill {fold_count} folds"
        )));
    }
    Ok(())
}

fn assign_round_robin(order: &[usize], n: usize, fold_count: usize) -> Vec<usize> {
    let mut assignments = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assignments[i] = pos % fold_count;
    }
    assignments
}

/// Random fold assignment with sizes differing by at most one.
pub fn kfold_split(n: usize, fold_count: usize, seed: u64) -> Result<FoldSplit> {
    check_folds(n, fold_count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    Ok(FoldSplit {
        fold_count,
        assignments: assign_round_robin(&order, n, fold_count),
        seed,
    })
}

/// Like [`kfold_split`] but deals each class out across the folds in turn so
/// every fold sees roughly the class proportions of the whole set.
pub fn stratified_kfold_split(classes: &[usize], fold_count: usize, seed: u64) -> Result<FoldSplit> {
    let n = classes.len();
    check_folds(n, fold_count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_classes = classes.iter().copied().max().map_or(0, |m| m + 1);
    let mut order = Vec::with_capacity(n);
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| classes[i] == c).collect();
        members.shuffle(&mut rng);
        order.extend(members);
    }
    Ok(FoldSplit {
        fold_count,
        assignments: assign_round_robin(&order, n, fold_count),
        seed,
    })
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Single-label: one-hot at the row maximum. Multi-label: 1 wherever the
/// membership reaches `threshold`.
pub fn fuzzy_to_logical(
    fuzzy: &FuzzyLabelMatrix,
    mode: LabelMode,
    threshold: f64,
) -> Result<LogicalLabelMatrix> {
    let values = fuzzy.view();
    match mode {
        LabelMode::Single => {
            let classes: Vec<usize> = values.rows().into_iter().map(argmax).collect();
            LogicalLabelMatrix::from_classes(&classes, values.ncols())
        }
        LabelMode::Multi => {
            if !(threshold > 0.0 && threshold < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "threshold must lie in (0, 1), got {threshold}"
                )));
            }
            LogicalLabelMatrix::new(values.mapv(|v| u8::from(v >= threshold)))
        }
    }
}
