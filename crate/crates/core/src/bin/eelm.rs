use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use eelm::bench::{self, Algorithm, BenchReport, DataSource, ExperimentConfig};
use eelm::data::{self, CsvSchema, SincOptions, TaskKind, TestDistribution};
use eelm::learners::{self, AnchorStrategy, EelmOptions};
use eelm::model_io;
use eelm::{Activation, Error};

#[derive(Parser)]
#[command(name = "eelm", version, about = "ELM and EELM training and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare ELM and EELM on the SinC function.
    Sinc(SincArgs),
    /// Repeated random-split benchmark on a CSV dataset.
    Bench(BenchArgs),
    /// Benchmark over a list of hidden node counts.
    Sweep(BenchArgs),
    /// Train one model and save it.
    Train(TrainArgs),
    /// Predict with a saved model.
    Predict(PredictArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Elm,
    Eelm,
    Both,
}

impl AlgoArg {
    fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgoArg::Elm => vec![Algorithm::Elm],
            AlgoArg::Eelm => vec![Algorithm::Eelm],
            AlgoArg::Both => vec![Algorithm::Elm, Algorithm::Eelm],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AnchorArg {
    First,
    Random,
    Even,
}

impl From<AnchorArg> for AnchorStrategy {
    fn from(a: AnchorArg) -> Self {
        match a {
            AnchorArg::First => AnchorStrategy::FirstN0,
            AnchorArg::Random => AnchorStrategy::RandomN0,
            AnchorArg::Even => AnchorStrategy::EvenlySpacedByProjection,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Reg,
    Cls,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestDistArg {
    Uniform,
    Normal,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "both")]
    algo: AlgoArg,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    anchor_strategy: AnchorArg,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV file for plot data.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct SincArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    #[arg(long, default_value_t = 200)]
    n_train: usize,
    #[arg(long, default_value_t = 200)]
    n_test: usize,
    /// Standard deviation of Gaussian noise added to training targets.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    test_dist: TestDistArg,
}

#[derive(Args)]
struct CsvArgs {
    #[arg(long)]
    csv: PathBuf,
    /// Target column; several comma-separated columns for multi-output regression.
    #[arg(long)]
    target: String,
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Fixed class order for classification; defaults to first-seen order.
    #[arg(long, value_delimiter = ',')]
    classes: Option<Vec<String>>,
}

impl CsvArgs {
    fn schema(&self) -> CsvSchema {
        CsvSchema {
            targets: self
                .target
                .split(',')
                .map(|s| s.trim().to_string())
                .collect(),
            task: match self.task {
                TaskArg::Reg => TaskKind::Regression,
                TaskArg::Cls => TaskKind::Classification,
            },
            class_labels: self.classes.clone(),
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: CsvArgs,
    #[arg(long, conflicts_with = "nodes_sweep")]
    nodes: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    nodes_sweep: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.75)]
    split: f64,
    /// Min-max scale attributes to [-1, 1] with training-split ranges.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: CsvArgs,
    #[arg(long, value_enum, default_value = "eelm")]
    algo: AlgoArg,
    #[arg(long)]
    nodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    anchor_strategy: AnchorArg,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    csv: PathBuf,
    /// Target column(s) to score against; without it every column is an input.
    #[arg(long, requires = "task")]
    target: Option<String>,
    #[arg(long, value_enum)]
    task: Option<TaskArg>,
    /// Class order used at training time.
    #[arg(long, value_delimiter = ',')]
    classes: Option<Vec<String>>,
    /// Predictions CSV; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Precondition(_) => EXIT_CONFIG,
        Error::Io { .. } | Error::Format { .. } | Error::Shape(_) => EXIT_DATA,
        Error::NumericalFailure(_)
        | Error::RankDeficient { .. }
        | Error::Overflow { .. }
        | Error::NoDifference => EXIT_NUMERIC,
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summarize(report: &BenchReport) {
    eprintln!(
        "{:<6} {:>6} {:>5} {:>6} {:>14} {:>14} {:>12} {:>12}",
        "algo", "nodes", "ok", "failed", "train_metric", "test_metric", "train_s", "test_s"
    );
    for run in &report.runs {
        let a = &run.aggregate;
        let mean =
            |s: &Option<bench::Stats>| s.map(|s| format!("{:.6e}", s.mean)).unwrap_or("-".into());
        eprintln!(
            "{:<6} {:>6} {:>5} {:>6} {:>14} {:>14} {:>12} {:>12}",
            run.algorithm.name(),
            run.nodes,
            a.completed,
            a.failed,
            mean(&a.train_metric),
            mean(&a.test_metric),
            mean(&a.train_seconds),
            mean(&a.test_seconds)
        );
    }
    if let Some(fit) = report.selection_fit {
        eprintln!(
            "EELM selection seconds ~ {:.3e} + {:.3e} * n0*d (R^2 = {:.4})",
            fit.intercept, fit.slope, fit.r_squared
        );
    }
}

fn finish_report(
    report: &BenchReport,
    common: &Common,
    plot_csv: Option<String>,
) -> Result<ExitCode, Error> {
    summarize(report);
    write_or_print(common.out.as_deref(), &(report.to_json() + "\n"))?;
    if let (Some(path), Some(csv)) = (&common.plot_data, plot_csv) {
        write_or_print(Some(path), &csv)?;
    }
    if report.has_total_failure() {
        eprintln!("error: every trial failed for at least one algorithm");
        return Ok(ExitCode::from(EXIT_NUMERIC));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_sinc(args: SincArgs) -> Result<ExitCode, Error> {
    let cfg = ExperimentConfig {
        algorithms: args.common.algo.algorithms(),
        source: DataSource::Sinc {
            n_train: args.n_train,
            n_test: args.n_test,
            options: SincOptions {
                test_distribution: match args.test_dist {
                    TestDistArg::Uniform => TestDistribution::Uniform,
                    TestDistArg::Normal => TestDistribution::TruncatedNormal,
                },
                noise_sigma: args.noise,
            },
        },
        nodes: vec![args.nodes],
        trials: args.common.trials,
        seed: args.common.seed,
        split: 0.75,
        anchor_strategy: args.common.anchor_strategy.into(),
        normalize: false,
    };
    let (report, plot) = bench::run_sinc(&cfg)?;
    finish_report(&report, &args.common, Some(plot.to_csv()))
}

fn bench_config(args: &BenchArgs, nodes: Vec<usize>) -> ExperimentConfig {
    ExperimentConfig {
        algorithms: args.common.algo.algorithms(),
        source: DataSource::Csv {
            path: args.data.csv.clone(),
            schema: args.data.schema(),
        },
        nodes,
        trials: args.common.trials,
        seed: args.common.seed,
        split: args.split,
        anchor_strategy: args.common.anchor_strategy.into(),
        normalize: args.normalize,
    }
}

fn run_bench(args: BenchArgs) -> Result<ExitCode, Error> {
    if args.nodes_sweep.is_some() {
        return Err(Error::Precondition(
            "bench takes --nodes; use the sweep command for --nodes-sweep".into(),
        ));
    }
    let cfg = bench_config(&args, vec![args.nodes.unwrap_or(20)]);
    let report = bench::run_dataset(&cfg)?;
    finish_report(&report, &args.common, None)
}

fn run_sweep(args: BenchArgs) -> Result<ExitCode, Error> {
    let nodes = args
        .nodes_sweep
        .clone()
        .ok_or_else(|| Error::Precondition("sweep needs --nodes-sweep a,b,c".into()))?;
    let cfg = bench_config(&args, nodes);
    let (report, plot) = bench::run_node_sweep(&cfg)?;
    finish_report(&report, &args.common, Some(plot.to_csv()))
}

fn run_train(args: TrainArgs) -> Result<ExitCode, Error> {
    let data = data::load_csv(&args.data.csv, &args.data.schema())?;
    let (model, report) = match args.algo {
        AlgoArg::Elm => learners::train_elm(&data, args.nodes, &Activation::gaussian(), args.seed)?,
        AlgoArg::Eelm => learners::train_eelm(
            &data,
            args.nodes,
            &EelmOptions {
                anchor_strategy: args.anchor_strategy.into(),
                seed: args.seed,
                force_svd: false,
            },
        )?,
        AlgoArg::Both => return Err(Error::Precondition("train takes --algo elm or eelm".into())),
    };
    model_io::save_model(&model, &args.out)?;
    eprintln!(
        "trained {} nodes in {:.4}s (selection {:.4}s), training {:?} = {:.6e}, full rank: {}",
        model.hidden_nodes(),
        report.train_seconds,
        report.selection_seconds,
        report.metric_kind,
        report.train_metric,
        report.hidden_matrix_rank_ok
    );
    Ok(ExitCode::SUCCESS)
}

fn run_predict(args: PredictArgs) -> Result<ExitCode, Error> {
    let model = model_io::load_model(&args.model)?;
    let (inputs, scored) = match (&args.target, args.task) {
        (Some(target), Some(task)) => {
            let csv = CsvArgs {
                csv: args.csv.clone(),
                target: target.clone(),
                task,
                classes: args.classes.clone(),
            };
            let ds = data::load_csv(&args.csv, &csv.schema())?;
            (ds.inputs.clone(), Some(ds))
        }
        _ => (data::load_inputs_csv(&args.csv)?, None),
    };
    let pred = learners::predict(&model, &inputs)?;

    let mut out = (0..pred.cols())
        .map(|c| format!("y{c}"))
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for row in pred.row_iter() {
        out.push_str(
            &row.iter()
                .map(|v| format!("{v:e}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    write_or_print(args.out.as_deref(), &out)?;

    if let Some(ds) = scored {
        if ds.task.is_classification() {
            eprintln!(
                "classification rate: {:.6}",
                data::classification_rate(&pred, &ds.targets)?
            );
        } else {
            eprintln!("rmse: {:.6e}", data::rmse(&pred, &ds.targets)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sinc(a) => run_sinc(a),
        Command::Bench(a) => run_bench(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Train(a) => run_train(a),
        Command::Predict(a) => run_predict(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
