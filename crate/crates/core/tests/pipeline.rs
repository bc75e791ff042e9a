use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eelm::bench::{self, Algorithm, BenchReport, DataSource, ExperimentConfig};
use eelm::data::{self, SincOptions};
use eelm::learners::{AnchorStrategy, EelmOptions, PinvPath};
use eelm::{train_eelm, Dataset, Mat, Task};

fn separable(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Mat::from_fn(n, 2, |i, _| {
        let centre = if i % 2 == 0 { -2.0 } else { 2.0 };
        centre + rng.random_range(-1.0..1.0)
    });
    let t = Mat::from_fn(n, 2, |i, c| if i % 2 == c { 1.0 } else { 0.0 });
    Dataset::new("separable", Task::Classification { classes: 2 }, x, t).unwrap()
}

/// Test accuracy of assigning each test point to the nearer class mean.
fn nearest_centroid_rate(train: &Dataset, test: &Dataset) -> f64 {
    let d = train.input_dim();
    let k = train.output_dim();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (x, t) in train.inputs.row_iter().zip(train.targets.row_iter()) {
        let c = t.iter().position(|&v| v == 1.0).unwrap();
        counts[c] += 1;
        for j in 0..d {
            sums[c][j] += x[j];
        }
    }
    let mut hits = 0;
    for (x, t) in test.inputs.row_iter().zip(test.targets.row_iter()) {
        let dist = |c: usize| -> f64 {
            (0..d)
                .map(|j| (x[j] - sums[c][j] / counts[c] as f64).powi(2))
                .sum()
        };
        let guess = (0..k)
            .min_by(|&a, &b| dist(a).total_cmp(&dist(b)))
            .unwrap();
        if t[guess] == 1.0 {
            hits += 1;
        }
    }
    hits as f64 / test.len() as f64
}

#[test]
fn separable_classes_match_centroid_baseline() {
    let ds = separable(40, 3);
    let cfg = ExperimentConfig {
        source: DataSource::Memory(ds.clone()),
        nodes: vec![10],
        trials: 10,
        seed: 1,
        ..ExperimentConfig::sinc_default()
    };
    let report = bench::run_dataset(&cfg).unwrap();
    for run in &report.runs {
        assert_eq!(run.trials.len(), 10, "{:?}", run.failures);
        for trial in &run.trials {
            let (train, test) = data::split(&ds, 0.75, trial.seed).unwrap();
            let baseline = nearest_centroid_rate(&train, &test);
            assert!(baseline >= 0.9);
            assert!(
                trial.test_metric >= 0.9,
                "{:?} trial {}: rate {} (centroid {baseline})",
                run.algorithm,
                trial.trial,
                trial.test_metric
            );
        }
    }
}

fn small_sinc() -> ExperimentConfig {
    ExperimentConfig {
        source: DataSource::Sinc {
            n_train: 60,
            n_test: 40,
            options: SincOptions::default(),
        },
        nodes: vec![60],
        trials: 3,
        seed: 11,
        ..ExperimentConfig::sinc_default()
    }
}

#[test]
fn sinc_runs_are_reproducible() {
    let (a, plot_a) = bench::run_sinc(&small_sinc()).unwrap();
    let (b, plot_b) = bench::run_sinc(&small_sinc()).unwrap();
    assert_eq!(plot_a.to_csv(), plot_b.to_csv());
    assert_eq!(plot_a.rows.len(), 100);
    for (ra, rb) in a.runs.iter().zip(&b.runs) {
        let metrics = |r: &bench::RunRecord| -> Vec<(f64, f64)> {
            r.trials
                .iter()
                .map(|t| (t.train_metric, t.test_metric))
                .collect()
        };
        assert_eq!(metrics(ra), metrics(rb));
    }
    let eelm = a.run(Algorithm::Eelm, 60).unwrap();
    assert_eq!(eelm.trials.len(), 1);
}

#[test]
fn sweep_has_one_row_per_algorithm_and_count() {
    let cfg = ExperimentConfig {
        source: DataSource::Memory(separable(120, 5)),
        nodes: vec![20, 40, 60],
        trials: 2,
        seed: 2,
        ..ExperimentConfig::sinc_default()
    };
    let (report, plot) = bench::run_node_sweep(&cfg).unwrap();
    assert_eq!(plot.rows.len(), 6);
    for alg in [Algorithm::Elm, Algorithm::Eelm] {
        let nodes: Vec<usize> = plot
            .rows
            .iter()
            .filter(|r| r.algorithm == alg)
            .map(|r| r.nodes)
            .collect();
        assert_eq!(nodes, vec![20, 40, 60]);
    }
    assert!(report.selection_fit.is_some());
    let csv = plot.to_csv();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn report_carries_table_columns() {
    let cfg = ExperimentConfig {
        source: DataSource::Memory(separable(40, 8)),
        nodes: vec![10],
        trials: 3,
        ..ExperimentConfig::sinc_default()
    };
    let report = bench::run_dataset(&cfg).unwrap();
    let json = report.to_json();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let agg = &v["runs"][0]["aggregate"];
    for key in [
        "train_metric",
        "test_metric",
        "train_seconds",
        "test_seconds",
        "selection_seconds",
    ] {
        for stat in ["mean", "std", "best"] {
            assert!(agg[key][stat].is_number(), "missing {key}.{stat}");
        }
    }
    let trial = &v["runs"][0]["trials"][0];
    for key in ["hidden_matrix_rank_ok", "pinv_path", "seed"] {
        assert!(!trial[key].is_null(), "missing trial {key}");
    }
    assert_eq!(BenchReport::from_json(&json).unwrap(), report);

    let tampered = json.replacen("\"schema_version\": 1", "\"schema_version\": 9", 1);
    assert!(BenchReport::from_json(&tampered).is_err());
}

#[test]
fn projection_solve_never_reports_rank_deficiency() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..200 {
        let d = rng.random_range(1..=6);
        let n = rng.random_range(2..=80);
        let n0 = rng.random_range(1..=n);
        let x = Mat::from_fn(n, d, |_, _| rng.random_range(-10.0..10.0));
        let t = Mat::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0));
        let ds = Dataset::new("random", Task::Regression, x, t).unwrap();
        let strategy = [
            AnchorStrategy::FirstN0,
            AnchorStrategy::RandomN0,
            AnchorStrategy::EvenlySpacedByProjection,
        ][case % 3];
        let opts = EelmOptions {
            anchor_strategy: strategy,
            seed: case as u64,
            force_svd: false,
        };
        let (_, report) = train_eelm(&ds, n0, &opts)
            .unwrap_or_else(|e| panic!("case {case} (n={n}, d={d}, n0={n0}): {e}"));
        assert!(report.hidden_matrix_rank_ok);
        assert_eq!(report.pinv_path, PinvPath::OrthogonalProjection);
    }
}

#[test]
fn csv_dataset_benchmark_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.csv");
    let ds = separable(48, 4);
    let mut text = String::from("a,b,label\n");
    for (x, t) in ds.inputs.row_iter().zip(ds.targets.row_iter()) {
        let label = if t[0] == 1.0 { "neg" } else { "pos" };
        text.push_str(&format!("{},{},{label}\n", x[0], x[1]));
    }
    std::fs::write(&path, text).unwrap();
    let cfg = ExperimentConfig {
        source: DataSource::Csv {
            path: path.clone(),
            schema: data::CsvSchema::classification("label"),
        },
        nodes: vec![8],
        trials: 4,
        normalize: true,
        ..ExperimentConfig::sinc_default()
    };
    let report = bench::run_dataset(&cfg).unwrap();
    assert_eq!(report.dataset.n_train + report.dataset.n_test, 48);
    assert_eq!(report.dataset.n_train, 36);
    assert!(!report.has_total_failure());
}
