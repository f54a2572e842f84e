use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsketch_core::distill::KernelModel;
use rsketch_core::{KernelConfig, LshFamilyConfig};
use serde_json::Value;
use tempfile::TempDir;

fn rsketch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsketch"))
        .args(args)
        .output()
        .expect("failed to spawn rsketch")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn records(o: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&o.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A planted 2-d regression problem: libsvm data plus one teacher score per row.
struct Planted {
    dir: TempDir,
    data: PathBuf,
    teacher: PathBuf,
}

impl Planted {
    fn new(n: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let kernel = KernelConfig::new(LshFamilyConfig::l2(2, 2.0), 1);
        let teacher = KernelModel::new(
            (0..10).map(|_| rng.random_range(-1.0..1.0)).collect(),
            (0..5).map(|_| rng.random_range(-1.0..1.0)).collect(),
            None,
            kernel,
        )
        .unwrap();
        let mut data = String::new();
        let mut scores = String::new();
        for _ in 0..n {
            let x = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            let y = teacher.predict(&x).unwrap();
            data.push_str(&format!("{y} 1:{} 2:{}\n", x[0], x[1]));
            scores.push_str(&format!("{y}\n"));
        }
        let dir = TempDir::new().unwrap();
        let (d, t) = (dir.path().join("train.svm"), dir.path().join("teacher.txt"));
        fs::write(&d, data).unwrap();
        fs::write(&t, scores).unwrap();
        Self { dir, data: d, teacher: t }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn distill(&self, out: &Path, extra: &[&str]) -> Output {
        let mut args = vec![
            "--format",
            "json-lines",
            "distill",
            "--data",
            s(&self.data),
            "--task",
            "regression",
            "--teacher",
            s(&self.teacher),
            "--out",
            s(out),
            "--bandwidth",
            "2.0",
            "--points",
            "10",
            "--epochs",
            "40",
            "--batch-size",
            "32",
        ];
        args.extend_from_slice(extra);
        rsketch(&args)
    }

    fn build(&self, model: &Path, out: &Path, extra: &[&str]) -> Output {
        let mut args = vec!["build", "--model", s(model), "--out", s(out), "--rows", "50", "--range", "16"];
        args.extend_from_slice(extra);
        rsketch(&args)
    }
}

#[test]
fn missing_teacher_file_is_an_input_error_naming_the_path() {
    let p = Planted::new(50);
    let missing = p.path("nope.txt");
    let o = rsketch(&[
        "distill",
        "--data",
        s(&p.data),
        "--task",
        "regression",
        "--teacher",
        s(&missing),
        "--out",
        s(&p.path("m.bin")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.txt"), "{}", stderr(&o));
}

#[test]
fn planted_distillation_recovers_the_teacher_and_reruns_are_identical() {
    let p = Planted::new(3000);
    let (m1, m2) = (p.path("a.model"), p.path("b.model"));
    let o = p.distill(&m1, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec = &records(&o)[0];
    let val = rec["val_mse"].as_f64().unwrap();
    assert!(val <= 1e-3, "validation MSE {val}");
    assert!(p.distill(&m2, &[]).status.success());
    assert_eq!(fs::read(&m1).unwrap(), fs::read(&m2).unwrap());

    let (s1, s2) = (p.path("a.sketch"), p.path("b.sketch"));
    assert!(p.build(&m1, &s1, &["--threads", "4"]).status.success());
    assert!(p.build(&m1, &s2, &["--threads", "4"]).status.success());
    let bytes = fs::read(&s1).unwrap();
    assert_eq!(bytes, fs::read(&s2).unwrap());
    assert_eq!(bytes.len(), 64 + 50 * 16 * 8);
}

#[test]
fn range_below_two_is_rejected() {
    let p = Planted::new(200);
    let m = p.path("m.model");
    assert!(p.distill(&m, &["--epochs", "2"]).status.success());
    let o = p.build(&m, &p.path("s.sketch"), &["--range", "1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!p.path("s.sketch").exists());
}

#[test]
fn corrupted_sketch_reports_format_error_with_offset() {
    let p = Planted::new(200);
    let (m, sk) = (p.path("m.model"), p.path("s.sketch"));
    assert!(p.distill(&m, &["--epochs", "2"]).status.success());
    assert!(p.build(&m, &sk, &[]).status.success());
    let mut bytes = fs::read(&sk).unwrap();
    bytes[4] = 0xEE;
    fs::write(&sk, &bytes).unwrap();

    let o = rsketch(&["verify", "--sketch", s(&sk)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("byte 4"), "{}", stderr(&o));

    let o = rsketch(&["evaluate", "--sketch", s(&sk), "--data", s(&p.data), "--task", "regression"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("byte 4"));
}

#[test]
fn mean_estimator_equals_single_group_median_of_means() {
    let p = Planted::new(200);
    let (m, sk) = (p.path("m.model"), p.path("s.sketch"));
    assert!(p.distill(&m, &["--epochs", "2"]).status.success());
    assert!(p.build(&m, &sk, &[]).status.success());
    let (a, b) = (p.path("mean.txt"), p.path("mom.txt"));
    let base = ["query", "--sketch", s(&sk), "--data", s(&p.data), "--task", "regression"];
    let run = |extra: &[&str]| rsketch(&[&base[..], extra].concat());
    assert!(run(&["--estimator", "mean", "--out", s(&a)]).status.success());
    assert!(run(&["--estimator", "mom", "--groups", "1", "--out", s(&b)]).status.success());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 200);
    assert_eq!(text, fs::read_to_string(&b).unwrap());
}

#[test]
fn command_line_flags_override_the_config_file() {
    let p = Planted::new(200);
    let (m, sk) = (p.path("m.model"), p.path("s.sketch"));
    assert!(p.distill(&m, &["--epochs", "2"]).status.success());
    let cfg = p.path("build.conf");
    fs::write(&cfg, "# build settings\nrows = 30\nrange = 8\n").unwrap();
    let o = rsketch(&[
        "--format",
        "json-lines",
        "--config",
        s(&cfg),
        "build",
        "--model",
        s(&m),
        "--out",
        s(&sk),
        "--range",
        "4",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec = &records(&o)[0];
    assert_eq!(rec["rows"], 30);
    assert_eq!(rec["range"], 4);
}

#[test]
fn quick_verification_passes() {
    let o = rsketch(&["--threads", "0", "--format", "json-lines", "verify", "--quick"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let recs = records(&o);
    assert!(!recs.is_empty());
    assert!(recs.iter().all(|r| r["passed"] == true));
}

#[test]
fn evaluate_reports_accounting_and_enforces_requirements() {
    let p = Planted::new(500);
    let (m, sk) = (p.path("m.model"), p.path("s.sketch"));
    assert!(p.distill(&m, &[]).status.success());
    assert!(p.build(&m, &sk, &["--rows", "400", "--range", "64"]).status.success());
    let base = [
        "--format",
        "json-lines",
        "evaluate",
        "--sketch",
        s(&sk),
        "--data",
        s(&p.data),
        "--task",
        "regression",
        "--model",
        s(&m),
        "--nn-spec",
        "16/16",
    ];
    let o = rsketch(&base);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec = &records(&o)[0];
    assert_eq!(rec["metric"], "mae");
    assert_eq!(rec["params"], 400 * 64);
    assert!(rec["model_value"].as_f64().unwrap() <= 0.05);
    assert_eq!(rec["nn_params"], 2 * 16 + 16 + 16 * 16 + 16 + 16 + 1);

    let o = rsketch(&[&base[..], &["--require", "1e-12"]].concat());
    assert_eq!(o.status.code(), Some(1));
}
