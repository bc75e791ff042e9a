//! Experiment harness: SinC comparison, repeated split benchmarks, node
//! sweeps and selection-cost scaling, with JSON reports and CSV plot data.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{
    classification_rate, gen_sinc, load_csv, rmse, split, CsvSchema, Dataset, SincOptions, Task,
};
use crate::error::{Error, Result};
use crate::learners::{
    eelm_select, predict, train_eelm, train_elm, AnchorStrategy, EelmOptions, PinvPath, SlfnModel,
    TrainReport,
};
use crate::matrix::Mat;
use crate::weight_select::Activation;

pub const REPORT_SCHEMA: &str = "eelm-bench-report";
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Elm,
    Eelm,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Elm => "elm",
            Algorithm::Eelm => "eelm",
        }
    }
}

#[derive(Debug, Clone)]
pub enum DataSource {
    Sinc {
        n_train: usize,
        n_test: usize,
        options: SincOptions,
    },
    Csv {
        path: PathBuf,
        schema: CsvSchema,
    },
    Memory(Dataset),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub source: DataSource,
    /// One entry for a single benchmark, several for a sweep.
    pub nodes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Training fraction for repeated random splits.
    pub split: f64,
    pub anchor_strategy: AnchorStrategy,
    /// Min-max scale attributes to `[-1, 1]` (using training ranges).
    pub normalize: bool,
}

impl ExperimentConfig {
    /// The SinC protocol: 200 grid points, 200 test points, 200 nodes,
    /// 50 ELM trials.
    pub fn sinc_default() -> Self {
        ExperimentConfig {
            algorithms: vec![Algorithm::Elm, Algorithm::Eelm],
            source: DataSource::Sinc {
                n_train: 200,
                n_test: 200,
                options: SincOptions::default(),
            },
            nodes: vec![200],
            trials: 50,
            seed: 0,
            split: 0.75,
            anchor_strategy: AnchorStrategy::RandomN0,
            normalize: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Precondition("no algorithm selected".into()));
        }
        if self.trials == 0 {
            return Err(Error::Precondition("trials must be >= 1".into()));
        }
        if self.nodes.is_empty() || self.nodes.contains(&0) {
            return Err(Error::Precondition("node counts must be >= 1".into()));
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::Precondition(format!(
                "split must lie in (0, 1), got {}",
                self.split
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Sinc,
    Dataset,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Rmse,
    ClassificationRate,
}

impl MetricName {
    fn for_task(task: Task) -> Self {
        if task.is_classification() {
            MetricName::ClassificationRate
        } else {
            MetricName::Rmse
        }
    }

    fn better(&self, a: f64, b: f64) -> f64 {
        match self {
            MetricName::Rmse => a.min(b),
            MetricName::ClassificationRate => a.max(b),
        }
    }

    fn worst(&self) -> f64 {
        match self {
            MetricName::Rmse => f64::INFINITY,
            MetricName::ClassificationRate => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSummary {
    pub name: String,
    pub task: Task,
    pub n_train: usize,
    pub n_test: usize,
    pub input_dim: usize,
    pub output_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub host: String,
    pub os: String,
    pub arch: String,
    pub timestamp_unix: u64,
}

impl Environment {
    pub fn capture() -> Self {
        let host = std::env::var("HOSTNAME")
            .ok()
            .or_else(|| std::fs::read_to_string("/etc/hostname").ok())
            .map(|h| h.trim().to_string())
            .unwrap_or_else(|| "unknown".into());
        Environment {
            host,
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub train_seconds: f64,
    /// EELM step 1 alone (included in `train_seconds`); 0 for ELM.
    pub selection_seconds: f64,
    pub test_seconds: f64,
    pub train_metric: f64,
    pub test_metric: f64,
    pub hidden_matrix_rank_ok: bool,
    pub pinv_path: PinvPath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialFailure {
    pub trial: usize,
    pub seed: u64,
    pub error: String,
}

/// Mean, population standard deviation (trial-to-trial spread) and best.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub best: f64,
}

impl Stats {
    fn from_values(values: &[f64], better: impl Fn(f64, f64) -> f64, worst: f64) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(Stats {
            mean,
            std: var.sqrt(),
            best: values.iter().fold(worst, |b, &v| better(b, v)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregate {
    pub completed: usize,
    pub failed: usize,
    pub train_metric: Option<Stats>,
    pub test_metric: Option<Stats>,
    pub train_seconds: Option<Stats>,
    pub selection_seconds: Option<Stats>,
    pub test_seconds: Option<Stats>,
}

impl Aggregate {
    pub fn from_trials(metric: MetricName, trials: &[TrialRecord], failed: usize) -> Aggregate {
        let pick = |f: fn(&TrialRecord) -> f64| trials.iter().map(f).collect::<Vec<_>>();
        let metric_stats =
            |v: Vec<f64>| Stats::from_values(&v, |a, b| metric.better(a, b), metric.worst());
        let time_stats = |v: Vec<f64>| Stats::from_values(&v, f64::min, f64::INFINITY);
        Aggregate {
            completed: trials.len(),
            failed,
            train_metric: metric_stats(pick(|t| t.train_metric)),
            test_metric: metric_stats(pick(|t| t.test_metric)),
            train_seconds: time_stats(pick(|t| t.train_seconds)),
            selection_seconds: time_stats(pick(|t| t.selection_seconds)),
            test_seconds: time_stats(pick(|t| t.test_seconds)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub nodes: usize,
    pub trials: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
    pub aggregate: Aggregate,
}

/// Least-squares line `y = intercept + slope * x` and its R^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchReport {
    pub schema: String,
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub dataset: DatasetSummary,
    pub metric: MetricName,
    pub seed: u64,
    pub split_fraction: Option<f64>,
    pub environment: Environment,
    pub runs: Vec<RunRecord>,
    /// Sweeps only: mean EELM selection seconds regressed on `n0 * d`.
    pub selection_fit: Option<LinearFit>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Parses and checks a report: schema tag and version, and that every
    /// aggregate matches its per-trial records.
    pub fn from_json(text: &str) -> Result<BenchReport> {
        let report: BenchReport = serde_json::from_str(text).map_err(|e| {
            Error::format(
                crate::error::Location::Row(e.line()),
                format!("invalid report: {e}"),
            )
        })?;
        if report.schema != REPORT_SCHEMA || report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::format(
                crate::error::Location::Unknown,
                format!(
                    "unsupported report schema: expected {REPORT_SCHEMA} v{REPORT_SCHEMA_VERSION}, found {} v{}",
                    report.schema, report.schema_version
                ),
            ));
        }
        report.check_aggregates(1e-12)?;
        Ok(report)
    }

    pub fn check_aggregates(&self, tol: f64) -> Result<()> {
        for run in &self.runs {
            let again = Aggregate::from_trials(self.metric, &run.trials, run.failures.len());
            if !aggregate_close(&again, &run.aggregate, tol) {
                return Err(Error::Precondition(format!(
                    "aggregate for {} with {} nodes does not match its trials",
                    run.algorithm.name(),
                    run.nodes
                )));
            }
        }
        Ok(())
    }

    pub fn run(&self, algorithm: Algorithm, nodes: usize) -> Option<&RunRecord> {
        self.runs
            .iter()
            .find(|r| r.algorithm == algorithm && r.nodes == nodes)
    }

    /// True when some algorithm/node combination failed every trial.
    pub fn has_total_failure(&self) -> bool {
        self.runs.iter().any(|r| r.aggregate.completed == 0)
    }
}

fn aggregate_close(a: &Aggregate, b: &Aggregate, tol: f64) -> bool {
    let close = |x: &Option<Stats>, y: &Option<Stats>| match (x, y) {
        (None, None) => true,
        (Some(x), Some(y)) => {
            let c = |p: f64, q: f64| p == q || (p - q).abs() <= tol * p.abs().max(q.abs()).max(1.0);
            c(x.mean, y.mean) && c(x.std, y.std) && c(x.best, y.best)
        }
        _ => false,
    };
    a.completed == b.completed
        && a.failed == b.failed
        && close(&a.train_metric, &b.train_metric)
        && close(&a.test_metric, &b.test_metric)
        && close(&a.train_seconds, &b.train_seconds)
        && close(&a.selection_seconds, &b.selection_seconds)
        && close(&a.test_seconds, &b.test_seconds)
}

fn evaluate(task: Task, pred: &Mat, target: &Mat) -> Result<f64> {
    if task.is_classification() {
        classification_rate(pred, target)
    } else {
        rmse(pred, target)
    }
}

fn train_one(
    algorithm: Algorithm,
    train: &Dataset,
    nodes: usize,
    seed: u64,
    strategy: AnchorStrategy,
) -> Result<(SlfnModel, TrainReport)> {
    match algorithm {
        Algorithm::Elm => train_elm(train, nodes, &Activation::gaussian(), seed),
        Algorithm::Eelm => train_eelm(
            train,
            nodes,
            &EelmOptions {
                anchor_strategy: strategy,
                seed,
                force_svd: false,
            },
        ),
    }
}

fn run_trial(
    algorithm: Algorithm,
    train: &Dataset,
    test: &Dataset,
    nodes: usize,
    trial: usize,
    seed: u64,
    strategy: AnchorStrategy,
) -> Result<(TrialRecord, SlfnModel)> {
    let (model, report) = train_one(algorithm, train, nodes, seed, strategy)?;
    let start = Instant::now();
    let test_pred = predict(&model, &test.inputs)?;
    let test_seconds = start.elapsed().as_secs_f64();
    let train_pred = predict(&model, &train.inputs)?;
    Ok((
        TrialRecord {
            trial,
            seed,
            train_seconds: report.train_seconds,
            selection_seconds: report.selection_seconds,
            test_seconds,
            train_metric: evaluate(train.task, &train_pred, &train.targets)?,
            test_metric: evaluate(test.task, &test_pred, &test.targets)?,
            hidden_matrix_rank_ok: report.hidden_matrix_rank_ok,
            pinv_path: report.pinv_path,
        },
        model,
    ))
}

/// Collects trials into a run; numeric failures are recorded, not fatal.
struct RunBuilder {
    algorithm: Algorithm,
    nodes: usize,
    trials: Vec<TrialRecord>,
    failures: Vec<TrialFailure>,
}

impl RunBuilder {
    fn new(algorithm: Algorithm, nodes: usize) -> Self {
        RunBuilder {
            algorithm,
            nodes,
            trials: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn record(&mut self, trial: usize, seed: u64, outcome: Result<TrialRecord>) {
        match outcome {
            Ok(rec) => self.trials.push(rec),
            Err(e) => {
                log::warn!(
                    "{} with {} nodes, trial {trial} (seed {seed}) failed: {e}",
                    self.algorithm.name(),
                    self.nodes
                );
                self.failures.push(TrialFailure {
                    trial,
                    seed,
                    error: e.to_string(),
                });
            }
        }
    }

    fn finish(self, metric: MetricName) -> RunRecord {
        let aggregate = Aggregate::from_trials(metric, &self.trials, self.failures.len());
        RunRecord {
            algorithm: self.algorithm,
            nodes: self.nodes,
            trials: self.trials,
            failures: self.failures,
            aggregate,
        }
    }
}

/// Per-point predictions for external plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct SincPlot {
    /// `(set, x, target, elm_pred, eelm_pred)`; `set` is "train" or "test".
    pub rows: Vec<(&'static str, f64, f64, Option<f64>, Option<f64>)>,
}

impl SincPlot {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("set,x,target,elm_pred,eelm_pred\n");
        let opt = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
        for (set, x, t, e, f) in &self.rows {
            let _ = writeln!(out, "{set},{x:e},{t:e},{},{}", opt(*e), opt(*f));
        }
        out
    }
}

fn summary(name: &str, task: Task, train: &Dataset, test: &Dataset) -> DatasetSummary {
    DatasetSummary {
        name: name.to_string(),
        task,
        n_train: train.len(),
        n_test: test.len(),
        input_dim: train.input_dim(),
        output_dim: train.output_dim(),
    }
}

fn seed_for(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(trial as u64)
}

/// ELM against EELM on generated SinC data.
///
/// ELM runs `trials` times with seeds `seed + t`. EELM is deterministic when
/// every training sample is an anchor, so it then runs once.
pub fn run_sinc(cfg: &ExperimentConfig) -> Result<(BenchReport, SincPlot)> {
    cfg.validate()?;
    let DataSource::Sinc {
        n_train,
        n_test,
        options,
    } = &cfg.source
    else {
        return Err(Error::Precondition(
            "run_sinc needs a SinC data source".into(),
        ));
    };
    let nodes = cfg.nodes[0];
    if nodes > *n_train {
        return Err(Error::Precondition(format!(
            "{nodes} nodes exceed {n_train} training samples"
        )));
    }
    let (train, test) = gen_sinc(*n_train, *n_test, cfg.seed, options)?;
    let metric = MetricName::Rmse;

    let mut runs = Vec::new();
    let mut preds: [Option<(Mat, Mat)>; 2] = [None, None];
    for &alg in &cfg.algorithms {
        let trials = match alg {
            Algorithm::Eelm
                if nodes == *n_train || cfg.anchor_strategy != AnchorStrategy::RandomN0 =>
            {
                1
            }
            _ => cfg.trials,
        };
        let mut run = RunBuilder::new(alg, nodes);
        for t in 0..trials {
            let seed = seed_for(cfg.seed, t);
            let outcome = run_trial(alg, &train, &test, nodes, t, seed, cfg.anchor_strategy);
            let outcome = outcome.and_then(|(rec, model)| {
                let idx = alg as usize;
                if preds[idx].is_none() {
                    preds[idx] = Some((
                        predict(&model, &train.inputs)?,
                        predict(&model, &test.inputs)?,
                    ));
                }
                Ok(rec)
            });
            run.record(t, seed, outcome);
        }
        runs.push(run.finish(metric));
    }

    let mut rows = Vec::with_capacity(train.len() + test.len());
    for (set, ds, which) in [("train", &train, 0), ("test", &test, 1)] {
        for i in 0..ds.len() {
            let pick = |p: &Option<(Mat, Mat)>| {
                p.as_ref()
                    .map(|(a, b)| if which == 0 { a.get(i, 0) } else { b.get(i, 0) })
            };
            rows.push((
                set,
                ds.inputs.get(i, 0),
                ds.targets.get(i, 0),
                pick(&preds[Algorithm::Elm as usize]),
                pick(&preds[Algorithm::Eelm as usize]),
            ));
        }
    }

    let report = BenchReport {
        schema: REPORT_SCHEMA.into(),
        schema_version: REPORT_SCHEMA_VERSION,
        experiment: ExperimentKind::Sinc,
        dataset: summary("sinc", Task::Regression, &train, &test),
        metric,
        seed: cfg.seed,
        split_fraction: None,
        environment: Environment::capture(),
        runs,
        selection_fit: None,
    };
    Ok((report, SincPlot { rows }))
}

fn load_source(source: &DataSource) -> Result<Dataset> {
    match source {
        DataSource::Csv { path, schema } => load_csv(path, schema),
        DataSource::Memory(ds) => Ok(ds.clone()),
        DataSource::Sinc { .. } => Err(Error::Precondition(
            "SinC data has a fixed train/test protocol; use run_sinc".into(),
        )),
    }
}

/// Fresh split per trial (seed `seed + t`), then each algorithm at each
/// node count.
fn run_splits(cfg: &ExperimentConfig, data: &Dataset) -> Result<Vec<RunRecord>> {
    let n_train = (cfg.split * data.len() as f64).ceil() as usize;
    if let Some(&max) = cfg.nodes.iter().max() {
        if max > n_train {
            return Err(Error::Precondition(format!(
                "{max} nodes exceed the {n_train} training samples of each split"
            )));
        }
    }
    let metric = MetricName::for_task(data.task);
    let mut builders: Vec<RunBuilder> = cfg
        .nodes
        .iter()
        .flat_map(|&n| cfg.algorithms.iter().map(move |&a| RunBuilder::new(a, n)))
        .collect();
    for t in 0..cfg.trials {
        let seed = seed_for(cfg.seed, t);
        let (mut train, mut test) = split(data, cfg.split, seed)?;
        if cfg.normalize {
            let ranges = crate::data::min_max_ranges(&train.inputs);
            train.inputs = crate::data::apply_min_max(&train.inputs, &ranges);
            test.inputs = crate::data::apply_min_max(&test.inputs, &ranges);
        }
        for b in builders.iter_mut() {
            let outcome = run_trial(
                b.algorithm,
                &train,
                &test,
                b.nodes,
                t,
                seed,
                cfg.anchor_strategy,
            )
            .map(|(rec, _)| rec);
            b.record(t, seed, outcome);
        }
    }
    Ok(builders.into_iter().map(|b| b.finish(metric)).collect())
}

fn split_summary(cfg: &ExperimentConfig, data: &Dataset) -> DatasetSummary {
    let n_train = (cfg.split * data.len() as f64).ceil() as usize;
    DatasetSummary {
        name: data.name.clone(),
        task: data.task,
        n_train,
        n_test: data.len() - n_train,
        input_dim: data.input_dim(),
        output_dim: data.output_dim(),
    }
}

/// Multi-trial comparison on a dataset with random train/test splits.
pub fn run_dataset(cfg: &ExperimentConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let data = load_source(&cfg.source)?;
    let cfg = ExperimentConfig {
        nodes: vec![cfg.nodes[0]],
        ..cfg.clone()
    };
    let runs = run_splits(&cfg, &data)?;
    Ok(BenchReport {
        schema: REPORT_SCHEMA.into(),
        schema_version: REPORT_SCHEMA_VERSION,
        experiment: ExperimentKind::Dataset,
        dataset: split_summary(&cfg, &data),
        metric: MetricName::for_task(data.task),
        seed: cfg.seed,
        split_fraction: Some(cfg.split),
        environment: Environment::capture(),
        runs,
        selection_fit: None,
    })
}

/// One row per algorithm and node count, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlot {
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub nodes: usize,
    pub algorithm: Algorithm,
    pub train_metric: Option<f64>,
    pub test_metric: Option<f64>,
    pub train_seconds: Option<f64>,
    pub selection_seconds: Option<f64>,
    pub test_seconds: Option<f64>,
}

impl SweepPlot {
    pub fn from_report(report: &BenchReport) -> SweepPlot {
        let mut rows = Vec::new();
        for alg in [Algorithm::Elm, Algorithm::Eelm] {
            for run in report.runs.iter().filter(|r| r.algorithm == alg) {
                let a = &run.aggregate;
                let mean = |s: &Option<Stats>| s.map(|s| s.mean);
                rows.push(SweepRow {
                    nodes: run.nodes,
                    algorithm: alg,
                    train_metric: mean(&a.train_metric),
                    test_metric: mean(&a.test_metric),
                    train_seconds: mean(&a.train_seconds),
                    selection_seconds: mean(&a.selection_seconds),
                    test_seconds: mean(&a.test_seconds),
                });
            }
        }
        SweepPlot { rows }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "nodes,algorithm,train_metric,test_metric,train_seconds,selection_seconds,test_seconds\n",
        );
        let opt = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.nodes,
                r.algorithm.name(),
                opt(r.train_metric),
                opt(r.test_metric),
                opt(r.train_seconds),
                opt(r.selection_seconds),
                opt(r.test_seconds)
            );
        }
        out
    }
}

/// Every algorithm at every node count, `trials` splits each.
pub fn run_node_sweep(cfg: &ExperimentConfig) -> Result<(BenchReport, SweepPlot)> {
    cfg.validate()?;
    let data = load_source(&cfg.source)?;
    let runs = run_splits(cfg, &data)?;

    let d = data.input_dim() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = runs
        .iter()
        .filter(|r| r.algorithm == Algorithm::Eelm)
        .filter_map(|r| {
            r.aggregate
                .selection_seconds
                .map(|s| (r.nodes as f64 * d, s.mean))
        })
        .unzip();
    let report = BenchReport {
        schema: REPORT_SCHEMA.into(),
        schema_version: REPORT_SCHEMA_VERSION,
        experiment: ExperimentKind::Sweep,
        dataset: split_summary(cfg, &data),
        metric: MetricName::for_task(data.task),
        seed: cfg.seed,
        split_fraction: Some(cfg.split),
        environment: Environment::capture(),
        runs,
        selection_fit: linear_fit(&xs, &ys),
    };
    let plot = SweepPlot::from_report(&report);
    Ok((report, plot))
}

/// One measured point of EELM selection cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionTiming {
    pub n0: usize,
    pub dim: usize,
    pub seconds: f64,
}

/// Times EELM step 1 on `n0 x d` uniform data in `[-10, 10]`, every sample
/// an anchor, keeping the fastest of `reps` runs per point. Returns the
/// points and the fit of seconds against `n0 * d`.
pub fn selection_scaling(
    node_counts: &[usize],
    dims: &[usize],
    reps: usize,
    seed: u64,
) -> Result<(Vec<SelectionTiming>, Option<LinearFit>)> {
    let act = Activation::gaussian();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    for &d in dims {
        for &n0 in node_counts {
            let x = Mat::from_fn(n0, d, |_, _| rng.random_range(-10.0..10.0));
            let mut best = f64::INFINITY;
            for _ in 0..reps.max(1) {
                let start = Instant::now();
                let sel = eelm_select(&x, n0, AnchorStrategy::FirstN0, 0, &act)?;
                let secs = start.elapsed().as_secs_f64();
                std::hint::black_box(&sel);
                best = best.min(secs);
            }
            points.push(SelectionTiming {
                n0,
                dim: d,
                seconds: best,
            });
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n0 * p.dim) as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.seconds).collect();
    let fit = linear_fit(&xs, &ys);
    Ok((points, fit))
}
