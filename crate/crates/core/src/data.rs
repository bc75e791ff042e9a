//! Datasets, the SinC generator, train/test splitting and metrics.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};
use crate::matrix::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Task {
    Regression,
    Classification { classes: usize },
}

impl Task {
    pub fn is_classification(&self) -> bool {
        matches!(self, Task::Classification { .. })
    }
}

/// Labelled samples: `inputs` is `n x d`, `targets` is `n x m` (one-hot rows
/// for classification).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub task: Task,
    pub inputs: Mat,
    pub targets: Mat,
    pub class_labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, task: Task, inputs: Mat, targets: Mat) -> Result<Dataset> {
        if inputs.rows() != targets.rows() {
            return Err(Error::Shape(format!(
                "{} inputs but {} targets",
                inputs.rows(),
                targets.rows()
            )));
        }
        if let Task::Classification { classes } = task {
            if targets.cols() != classes {
                return Err(Error::Shape(format!(
                    "{classes} classes but targets have {} columns",
                    targets.cols()
                )));
            }
            for (i, row) in targets.row_iter().enumerate() {
                let ones = row.iter().filter(|&&v| v == 1.0).count();
                let zeros = row.iter().filter(|&&v| v == 0.0).count();
                if ones != 1 || ones + zeros != row.len() {
                    return Err(Error::Precondition(format!(
                        "target row {i} is not one-hot"
                    )));
                }
            }
        }
        Ok(Dataset {
            name: name.into(),
            task,
            inputs,
            targets,
            class_labels: None,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.targets.cols()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            task: self.task,
            inputs: self.inputs.select_rows(idx),
            targets: self.targets.select_rows(idx),
            class_labels: self.class_labels.clone(),
        }
    }

    /// Rescales every attribute to `[-1, 1]` using this dataset's ranges.
    /// Constant attributes map to 0.
    pub fn normalized_min_max(&self) -> Dataset {
        let ranges = min_max_ranges(&self.inputs);
        Dataset {
            inputs: apply_min_max(&self.inputs, &ranges),
            ..self.clone()
        }
    }
}

/// Per-attribute `(min, max)`.
pub fn min_max_ranges(x: &Mat) -> Vec<(f64, f64)> {
    (0..x.cols())
        .map(|j| {
            x.row_iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r[j]), hi.max(r[j]))
                })
        })
        .collect()
}

pub fn apply_min_max(x: &Mat, ranges: &[(f64, f64)]) -> Mat {
    Mat::from_fn(x.rows(), x.cols(), |i, j| {
        let (lo, hi) = ranges[j];
        if hi > lo {
            2.0 * (x.get(i, j) - lo) / (hi - lo) - 1.0
        } else {
            0.0
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Regression,
    Classification,
}

/// Which CSV columns are targets and how to read them.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    /// Target column names. Classification takes exactly one.
    pub targets: Vec<String>,
    pub task: TaskKind,
    /// Fixed class order; labels are otherwise encoded in first-seen order.
    pub class_labels: Option<Vec<String>>,
}

impl CsvSchema {
    pub fn regression(target: impl Into<String>) -> Self {
        CsvSchema {
            targets: vec![target.into()],
            task: TaskKind::Regression,
            class_labels: None,
        }
    }

    pub fn classification(target: impl Into<String>) -> Self {
        CsvSchema {
            targets: vec![target.into()],
            task: TaskKind::Classification,
            class_labels: None,
        }
    }
}

/// One-hot encodes labels. Classes are numbered in first-seen order unless
/// `fixed` gives the order, in which case unknown labels are an error.
pub fn one_hot(labels: &[String], fixed: Option<&[String]>) -> Result<(Mat, Vec<String>)> {
    let mut classes: Vec<String> = fixed.map(|f| f.to_vec()).unwrap_or_default();
    let mut index: HashMap<String, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();
    let mut ids = Vec::with_capacity(labels.len());
    for (row, l) in labels.iter().enumerate() {
        let id = match index.get(l) {
            Some(&id) => id,
            None if fixed.is_some() => {
                return Err(Error::format(
                    Location::Row(row + 1),
                    format!("unknown class label {l:?}"),
                ))
            }
            None => {
                classes.push(l.clone());
                index.insert(l.clone(), classes.len() - 1);
                classes.len() - 1
            }
        };
        ids.push(id);
    }
    if ids.is_empty() {
        return Err(Error::Precondition("no labels to encode".into()));
    }
    let k = classes.len();
    let m = Mat::from_fn(ids.len(), k, |i, c| if ids[i] == c { 1.0 } else { 0.0 });
    Ok((m, classes))
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

pub fn decode_one_hot(targets: &Mat, classes: &[String]) -> Vec<String> {
    targets
        .row_iter()
        .map(|r| classes[argmax(r)].clone())
        .collect()
}

/// Reads a headered CSV file. Non-target columns are numeric attributes.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    read_csv(file, &name, schema)
}

pub fn read_csv<R: std::io::Read>(reader: R, name: &str, schema: &CsvSchema) -> Result<Dataset> {
    if schema.targets.is_empty() {
        return Err(Error::Precondition("schema names no target column".into()));
    }
    if schema.task == TaskKind::Classification && schema.targets.len() != 1 {
        return Err(Error::Precondition(
            "classification takes exactly one target column".into(),
        ));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| csv_error(&e, "cannot read header"))?
        .clone();
    let mut target_cols = Vec::with_capacity(schema.targets.len());
    for t in &schema.targets {
        let c = headers.iter().position(|h| h.trim() == t).ok_or_else(|| {
            Error::format(
                Location::Row(0),
                format!("target column {t:?} not in header"),
            )
        })?;
        target_cols.push(c);
    }
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|c| !target_cols.contains(c))
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::format(Location::Row(0), "no attribute columns"));
    }

    let mut inputs = Vec::new();
    let mut numeric_targets = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(&e, "malformed record"))?;
        for &c in &feature_cols {
            inputs.push(parse_cell(&rec[c], row, c)?);
        }
        match schema.task {
            TaskKind::Regression => {
                for &c in &target_cols {
                    numeric_targets.push(parse_cell(&rec[c], row, c)?);
                }
            }
            TaskKind::Classification => labels.push(rec[target_cols[0]].trim().to_string()),
        }
    }
    let n = inputs.len() / feature_cols.len();
    if n == 0 {
        return Err(Error::format(Location::Row(1), "no data rows"));
    }
    let inputs = Mat::new(n, feature_cols.len(), inputs)?;
    match schema.task {
        TaskKind::Regression => {
            let targets = Mat::new(n, target_cols.len(), numeric_targets)?;
            Dataset::new(name, Task::Regression, inputs, targets)
        }
        TaskKind::Classification => {
            let (targets, classes) = one_hot(&labels, schema.class_labels.as_deref())?;
            let mut ds = Dataset::new(
                name,
                Task::Classification {
                    classes: classes.len(),
                },
                inputs,
                targets,
            )?;
            ds.class_labels = Some(classes);
            Ok(ds)
        }
    }
}

/// Reads a headered CSV file in which every column is a numeric attribute.
pub fn load_inputs_csv(path: impl AsRef<Path>) -> Result<Mat> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let cols = rdr
        .headers()
        .map_err(|e| csv_error(&e, "cannot read header"))?
        .len();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(&e, "malformed record"))?;
        for (c, cell) in rec.iter().enumerate() {
            values.push(parse_cell(cell, i + 1, c)?);
        }
    }
    if values.is_empty() {
        return Err(Error::format(Location::Row(1), "no data rows"));
    }
    Mat::new(values.len() / cols, cols, values)
}

fn parse_cell(cell: &str, row: usize, col: usize) -> Result<f64> {
    match cell.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::format(
            Location::Cell {
                row,
                column: col + 1,
            },
            format!("cannot parse {cell:?} as a finite number"),
        )),
    }
}

fn csv_error(e: &csv::Error, what: &str) -> Error {
    let location = match e.position() {
        // csv counts the header as line 1
        Some(p) => Location::Row((p.line() as usize).saturating_sub(1)),
        None => Location::Unknown,
    };
    Error::format(location, format!("{what}: {e}"))
}

/// `sin(x) / x`, patched to 1 at the origin.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestDistribution {
    /// Uniform on `[-30, 30]`.
    #[default]
    Uniform,
    /// Standard normal truncated to `[-3, 3]`, scaled by 10.
    TruncatedNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SincOptions {
    pub test_distribution: TestDistribution,
    /// Standard deviation of additive Gaussian noise on training targets.
    pub noise_sigma: f64,
}

pub const SINC_TRAIN_RANGE: f64 = 10.0;
pub const SINC_TEST_RANGE: f64 = 30.0;

/// Training inputs on an evenly spaced grid over `[-10, 10]`, test inputs
/// drawn at random over `[-30, 30]`.
pub fn gen_sinc(
    n_train: usize,
    n_test: usize,
    seed: u64,
    opts: &SincOptions,
) -> Result<(Dataset, Dataset)> {
    if n_train < 2 {
        return Err(Error::Precondition(format!(
            "need n_train >= 2, got {n_train}"
        )));
    }
    if n_test < 1 {
        return Err(Error::Precondition("need n_test >= 1".into()));
    }
    if !(opts.noise_sigma >= 0.0 && opts.noise_sigma.is_finite()) {
        return Err(Error::Precondition(format!(
            "noise sigma must be finite and >= 0, got {}",
            opts.noise_sigma
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = 2.0 * SINC_TRAIN_RANGE / (n_train - 1) as f64;
    let train_x: Vec<f64> = (0..n_train)
        .map(|i| {
            if i == n_train - 1 {
                SINC_TRAIN_RANGE
            } else {
                -SINC_TRAIN_RANGE + i as f64 * step
            }
        })
        .collect();
    let noise = Normal::new(0.0, opts.noise_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let train_y: Vec<f64> = train_x
        .iter()
        .map(|&x| {
            let y = sinc(x);
            if opts.noise_sigma > 0.0 {
                y + noise.sample(&mut rng)
            } else {
                y
            }
        })
        .collect();

    let std_normal = Normal::new(0.0, 1.0).expect("valid sigma");
    let test_x: Vec<f64> = (0..n_test)
        .map(|_| match opts.test_distribution {
            TestDistribution::Uniform => rng.random_range(-SINC_TEST_RANGE..=SINC_TEST_RANGE),
            TestDistribution::TruncatedNormal => loop {
                let z: f64 = std_normal.sample(&mut rng);
                if z.abs() <= 3.0 {
                    break z * SINC_TEST_RANGE / 3.0;
                }
            },
        })
        .collect();
    let test_y: Vec<f64> = test_x.iter().map(|&x| sinc(x)).collect();

    let train = Dataset::new(
        "sinc-train",
        Task::Regression,
        Mat::column(&train_x)?,
        Mat::column(&train_y)?,
    )?;
    let test = Dataset::new(
        "sinc-test",
        Task::Regression,
        Mat::column(&test_x)?,
        Mat::column(&test_y)?,
    )?;
    Ok((train, test))
}

/// Index partition for [`split`]: training gets `ceil(fraction * n)` rows.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Precondition(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let n_train = (fraction * n as f64).ceil() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::Precondition(format!(
            "splitting {n} samples at {fraction} leaves one side empty"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

/// Seeded random train/test partition.
pub fn split(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(data.len(), fraction, seed)?;
    Ok((data.subset(&train), data.subset(&test)))
}

fn check_same_shape(pred: &Mat, target: &Mat) -> Result<()> {
    if pred.shape() != target.shape() {
        return Err(Error::Shape(format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    Ok(())
}

/// Root mean squared deviation over all entries.
pub fn rmse(pred: &Mat, target: &Mat) -> Result<f64> {
    check_same_shape(pred, target)?;
    let n = pred.as_slice().len() as f64;
    let sse: f64 = pred
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((sse / n).sqrt())
}

/// Fraction of rows whose predicted argmax matches the one-hot target.
pub fn classification_rate(pred: &Mat, target: &Mat) -> Result<f64> {
    check_same_shape(pred, target)?;
    if pred.cols() < 2 {
        return Err(Error::Shape(
            "classification needs at least 2 columns".into(),
        ));
    }
    let hits = pred
        .row_iter()
        .zip(target.row_iter())
        .filter(|(p, t)| argmax(p) == argmax(t))
        .count();
    Ok(hits as f64 / pred.rows() as f64)
}
