use std::path::Path;
use std::process::{Command, Output};

use eelm::bench::BenchReport;

fn eelm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eelm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_regression_csv(path: &Path) {
    let mut text = String::from("x1,x2,y\n");
    for i in 0..40 {
        let x1 = i as f64 * 0.25 - 5.0;
        let x2 = ((i * 7) % 11) as f64 - 5.0;
        text.push_str(&format!("{x1},{x2},{}\n", 0.5 * x1 - x2));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn sinc_writes_report_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let plot = dir.path().join("p.csv");
    let out = eelm(&[
        "sinc", "--trials", "2", "--n-train", "40", "--n-test", "30", "--nodes", "40",
        "--out", p(&report), "--plot-data", p(&plot),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = BenchReport::from_json(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.runs.len(), 2);
    let csv = std::fs::read_to_string(&plot).unwrap();
    assert!(csv.starts_with("set,x,target,elm_pred,eelm_pred\n"));
    assert_eq!(csv.lines().count(), 71);
}

#[test]
fn train_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let model = dir.path().join("m.txt");
    let pred = dir.path().join("pred.csv");
    write_regression_csv(&csv);
    let out = eelm(&[
        "train", "--csv", p(&csv), "--target", "y", "--task", "reg", "--nodes", "40",
        "--out", p(&model),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&model).unwrap().starts_with("eelm-model\n"));

    let out = eelm(&[
        "predict", "--model", p(&model), "--csv", p(&csv), "--target", "y", "--task", "reg",
        "--out", p(&pred),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&pred).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "y0");
    assert_eq!(lines.len(), 41);
    // Every training sample is an anchor, so the fit interpolates.
    let first: f64 = lines[1].parse().unwrap();
    assert!((first - (0.5 * -5.0 - -5.0)).abs() < 1e-6, "{first}");
}

#[test]
fn bench_and_sweep_on_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    write_regression_csv(&csv);
    let out = eelm(&[
        "bench", "--csv", p(&csv), "--target", "y", "--task", "reg", "--nodes", "10",
        "--trials", "3",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = BenchReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(r.dataset.n_train, 30);

    let plot = dir.path().join("s.csv");
    let out = eelm(&[
        "sweep", "--csv", p(&csv), "--target", "y", "--task", "reg", "--nodes-sweep", "5,10,15",
        "--trials", "2", "--plot-data", p(&plot), "--out", p(&dir.path().join("s.json")),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&plot).unwrap().lines().count(), 7);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    write_regression_csv(&csv);
    let base = ["bench", "--csv", p(&csv), "--target", "y", "--task", "reg"];
    let with = |extra: &[&str]| {
        let mut v: Vec<&str> = base.to_vec();
        v.extend_from_slice(extra);
        code(&eelm(&v))
    };
    assert_eq!(with(&["--split", "1.5"]), 2);
    assert_eq!(with(&["--nodes", "500"]), 2);
    assert_eq!(with(&["--trials", "0"]), 2);
    let mut sweep = base.to_vec();
    sweep[0] = "sweep";
    assert_eq!(code(&eelm(&sweep)), 2);
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = eelm(&["bench", "--csv", p(&missing), "--target", "y", "--task", "reg"]);
    assert_eq!(code(&out), 3);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y\n1,2\nfoo,3\n").unwrap();
    let out = eelm(&["bench", "--csv", p(&bad), "--target", "y", "--task", "reg"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    let model = dir.path().join("m.txt");
    std::fs::write(&model, "eelm-model\nversion = 2\n").unwrap();
    let out = eelm(&["predict", "--model", p(&model), "--csv", p(&bad)]);
    assert_eq!(code(&out), 3);
}

#[test]
fn all_trials_failing_exits_4() {
    // Four samples near zero and four large ones in every attribute: any
    // training split embeds gaps of ~1e-40 across eight attributes.
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tiny.csv");
    let mut text = (0..8).map(|j| format!("x{j},")).collect::<String>() + "y\n";
    for k in 1..=4 {
        text += &format!("{}{k}\n", format!("{}e-40,", k).repeat(8));
        text += &format!("{}{k}\n", format!("{k},").repeat(8));
    }
    std::fs::write(&csv, text).unwrap();
    let out = eelm(&[
        "bench", "--csv", p(&csv), "--target", "y", "--task", "reg", "--algo", "eelm",
        "--nodes", "6", "--trials", "3",
    ]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    let r = BenchReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(r.runs[0].failures.len(), 3);
    assert!(r.runs[0].failures[0].error.contains("overflow"));
}
