//! Command-line front end: `distill -> build -> query / evaluate`, plus
//! `verify` and `dataset-info`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsketch_core::codec::{model_from_bytes, model_to_bytes, sketch_from_bytes, sketch_to_bytes};
use rsketch_core::distill::{self, DistillConfig, InitScheme, Optimizer, ThresholdMode};
use rsketch_core::metrics::{self, FlopConvention, MlpSpec};
use rsketch_core::sketch::default_groups;
use rsketch_core::{Estimator, KernelConfig, LshEnsembleSpec, LshFamilyConfig, RepresenterSketch, Task};

use crate::data::{self, Dataset, ScaleMode, Scaler};
use crate::error::{Error, Result};
use crate::report::{eval_record, Format, Record};
use crate::{io, parallel, verify};

#[derive(Debug, Parser)]
#[command(name = "rsketch", version, about = "Weighted kernel sketches distilled from teacher scores")]
pub struct Cli {
    /// Seed for training, hashing and splitting.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// File of `key = value` lines, one per long flag; flags on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a kernel model to teacher scores.
    #[command(args_override_self = true)]
    Distill(DistillArgs),
    /// Sketch a trained model.
    #[command(args_override_self = true)]
    Build(BuildArgs),
    /// Estimate scores for every row of a dataset.
    #[command(args_override_self = true)]
    Query(QueryArgs),
    /// Accuracy or MAE of sketch predictions, with memory and FLOP accounting.
    #[command(args_override_self = true)]
    Evaluate(EvaluateArgs),
    /// Run the Monte Carlo suites, or check sketch and model files.
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
    /// Summarize a libsvm dataset; optionally split and scale it.
    #[command(args_override_self = true)]
    DatasetInfo(DatasetInfoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Classification,
    Regression,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Classification => Task::BinaryClassification,
            TaskArg::Regression => Task::Regression,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// libsvm file, plain or gzip-compressed.
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long, value_enum, default_value_t = TaskArg::Classification)]
    pub task: TaskArg,

    /// Feature dimension; defaults to the largest index in the file.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    L2,
    Sparse,
    Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Data,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Auto,
    Fixed(f64),
}

impl FromStr for Bandwidth {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Bandwidth::Auto);
        }
        match s.parse::<f64>() {
            Ok(r) if r > 0.0 && r.is_finite() => Ok(Bandwidth::Fixed(r)),
            _ => Err(format!("expected a positive number or `auto`, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DistillArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// One teacher score per dataset row.
    #[arg(long)]
    pub teacher: PathBuf,

    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = FamilyArg::L2)]
    pub family: FamilyArg,

    /// Hash bandwidth r, or `auto` for a grid search around the median pairwise distance.
    #[arg(long, default_value = "auto")]
    pub bandwidth: Bandwidth,

    /// Hashes concatenated per row (K).
    #[arg(long, default_value_t = 1)]
    pub concat: usize,

    /// Number of learned points (M).
    #[arg(long, default_value_t = 100)]
    pub points: usize,

    /// Learn a projection to this many dimensions (p).
    #[arg(long)]
    pub projected_dim: Option<usize>,

    #[arg(long, default_value_t = 0.05)]
    pub learning_rate: f64,

    #[arg(long, default_value_t = 50)]
    pub epochs: usize,

    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,

    #[arg(long, value_enum, default_value_t = OptimizerArg::Sgd)]
    pub optimizer: OptimizerArg,

    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,

    #[arg(long, value_enum, default_value_t = InitArg::Data)]
    pub init: InitArg,

    /// Fraction of rows held out to report validation MSE and pick the bandwidth.
    #[arg(long, default_value_t = 0.1)]
    pub val_fraction: f64,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// Sketch file to write.
    #[arg(long)]
    pub out: PathBuf,

    /// Rows (L).
    #[arg(long, default_value_t = 2000)]
    pub rows: usize,

    /// Columns per row (R).
    #[arg(long, default_value_t = 20)]
    pub range: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Mean,
    Mom,
}

#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    #[arg(long, value_enum, default_value_t = EstimatorArg::Mom)]
    pub estimator: EstimatorArg,

    /// Median-of-means groups; must divide the row count. Defaults to 24 rounded down to a divisor.
    #[arg(long)]
    pub groups: Option<usize>,
}

impl EstimatorArgs {
    fn resolve(&self, rows: usize) -> Estimator {
        match self.estimator {
            EstimatorArg::Mean => Estimator::Mean,
            EstimatorArg::Mom => Estimator::MedianOfMeans(self.groups.unwrap_or_else(|| default_groups(rows))),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub sketch: PathBuf,

    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub estimator: EstimatorArgs,

    /// Write one estimate per line here instead of printing a record per row.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdArg {
    /// Positive iff score >= 0.5.
    Probability,
    /// Positive iff score >= 0.
    Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlopArg {
    /// A multiply-add counts as one FLOP.
    Mac,
    /// A multiply-add counts as two FLOPs.
    TwoMac,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub sketch: PathBuf,

    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub estimator: EstimatorArgs,

    #[arg(long, value_enum, default_value_t = ThresholdArg::Probability)]
    pub threshold: ThresholdArg,

    /// Also report the metric of this model's exact predictions.
    #[arg(long)]
    pub model: Option<PathBuf>,

    /// Hidden layer sizes of a dense baseline network, e.g. `512/256/128`.
    #[arg(long)]
    pub nn_spec: Option<String>,

    #[arg(long, default_value_t = 1)]
    pub nn_outputs: u64,

    #[arg(long, value_enum, default_value_t = FlopArg::Mac)]
    pub nn_flops: FlopArg,

    /// Exit with status 1 when accuracy falls below (or MAE rises above) this value.
    #[arg(long)]
    pub require: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Fewer trials and looser tolerances.
    #[arg(long)]
    pub quick: bool,

    /// Run only these suites (calibration, unbiasedness, variance, mom-coverage).
    #[arg(long)]
    pub suite: Vec<String>,

    /// Check that this sketch file decodes and re-encodes byte-identically (skips the suites).
    #[arg(long)]
    pub sketch: Option<PathBuf>,

    /// Same check for a model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DatasetInfoArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Test fraction for a stratified split.
    #[arg(long)]
    pub split: Option<f64>,

    /// Scale features (fit on the training part only).
    #[arg(long)]
    pub scale: Option<ScaleMode>,

    /// Write `<prefix>.train.svm` and `<prefix>.test.svm` (or `<prefix>.svm` without --split).
    #[arg(long)]
    pub out_prefix: Option<PathBuf>,
}

/// Records to print, and a failure to report after printing them.
#[derive(Debug, Default)]
pub struct Outcome {
    pub records: Vec<Record>,
    pub failure: Option<String>,
}

impl From<Vec<Record>> for Outcome {
    fn from(records: Vec<Record>) -> Self {
        Outcome { records, failure: None }
    }
}

const VALUE_FLAGS: [&str; 4] = ["--seed", "--threads", "--format", "--config"];

fn flag_name(arg: &str) -> Option<&str> {
    arg.strip_prefix("--").map(|s| s.split('=').next().unwrap_or(s))
}

/// Inserts the entries of `--config FILE` right after the subcommand, skipping
/// any flag the command line already sets.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut config = None;
    let mut sub = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].as_str();
        if let Some(p) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else if a == "--config" {
            config = args.get(i + 1).map(PathBuf::from);
            i += 1;
        } else if VALUE_FLAGS.contains(&a) {
            i += 1;
        } else if sub.is_none() && !a.starts_with('-') {
            sub = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub)) = (config, sub) else {
        return Ok(args);
    };
    let given: Vec<&str> = args.iter().filter_map(|a| flag_name(a)).collect();
    let entries = io::config_to_args(&path)?;
    let mut extra = Vec::new();
    let mut j = 0;
    while j < entries.len() {
        let takes_value = entries.get(j + 1).is_some_and(|v| !v.starts_with("--"));
        let width = if takes_value { 2 } else { 1 };
        if !given.contains(&flag_name(&entries[j]).unwrap_or("")) {
            extra.extend_from_slice(&entries[j..j + width]);
        }
        j += width;
    }
    let mut out = args;
    out.splice(sub + 1..sub + 1, extra);
    Ok(out)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let threads = if cli.threads == 0 {
        parallel::available_threads()
    } else {
        cli.threads
    };
    match &cli.command {
        Command::Distill(a) => cmd_distill(a, cli.seed).map(Into::into),
        Command::Build(a) => cmd_build(a, cli.seed, threads).map(Into::into),
        Command::Query(a) => cmd_query(a, threads).map(Into::into),
        Command::Evaluate(a) => cmd_evaluate(a, threads),
        Command::Verify(a) => cmd_verify(a, cli.seed, threads),
        Command::DatasetInfo(a) => cmd_dataset_info(a, cli.seed).map(Into::into),
    }
}

fn load(args: &DataArgs) -> Result<Dataset> {
    let d = data::load_libsvm(&args.data, args.task.into(), args.dim)?;
    if d.is_empty() {
        return Err(Error::input(format!("{} contains no rows", args.data.display())));
    }
    Ok(d)
}

fn family_config(family: FamilyArg, dim: usize, bandwidth: f64) -> LshFamilyConfig {
    match family {
        FamilyArg::L2 => LshFamilyConfig::l2(dim, bandwidth),
        FamilyArg::Sparse => LshFamilyConfig::sparse(dim, bandwidth),
        FamilyArg::Sign => LshFamilyConfig::sign(dim),
    }
}

fn gather<T: Clone>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i].clone()).collect()
}

fn cmd_distill(a: &DistillArgs, seed: u64) -> Result<Vec<Record>> {
    let dataset = load(&a.data)?;
    let scores = io::read_scores(&a.teacher, dataset.len())?;
    let cfg = DistillConfig {
        num_points: a.points,
        projected_dim: a.projected_dim,
        learning_rate: a.learning_rate,
        epochs: a.epochs,
        batch_size: a.batch_size,
        seed,
        init: match a.init {
            InitArg::Data => InitScheme::DataSubsample,
            InitArg::Gaussian => InitScheme::GaussianRandom,
        },
        optimizer: match a.optimizer {
            OptimizerArg::Sgd => Optimizer::Sgd { momentum: a.momentum },
            OptimizerArg::Adam => Optimizer::adam(),
        },
        ..DistillConfig::default()
    };
    cfg.validate()?;
    if a.concat == 0 {
        return Err(Error::input("--concat must be positive"));
    }
    if let Some(p) = a.projected_dim {
        if p > dataset.feature_dim {
            return Err(Error::input(format!(
                "--projected-dim {p} exceeds the feature dimension {}",
                dataset.feature_dim
            )));
        }
    }
    let (train_idx, val_idx) = data::split_indices(&dataset.labels, dataset.task, a.val_fraction, seed)?;
    let (train_x, train_y) = (gather(&dataset.features, &train_idx), gather(&scores, &train_idx));
    let (val_x, val_y) = (gather(&dataset.features, &val_idx), gather(&scores, &val_idx));

    let hashed_dim = a.projected_dim.unwrap_or(dataset.feature_dim);
    let mut record = Record::new();
    let bandwidth = match (a.family, a.bandwidth) {
        (FamilyArg::Sign, _) => 0.0,
        (_, Bandwidth::Fixed(r)) => r,
        (family, Bandwidth::Auto) => {
            let kernel = KernelConfig::new(family_config(family, hashed_dim, 1.0), a.concat);
            let search = distill::select_bandwidth((&train_x, &train_y), (&val_x, &val_y), &cfg, kernel)?;
            record.push("median_distance", search.median_distance);
            for (r, mse) in &search.candidates {
                record.push(&format!("val_mse@r={r:.4}"), *mse);
            }
            search.best
        }
    };
    let kernel = KernelConfig::new(family_config(a.family, hashed_dim, bandwidth), a.concat);
    let fitted = distill::fit(&train_x, &train_y, &cfg, kernel)?;
    let model = fitted.model;
    io::write_model(&a.out, &model)?;

    let val_mse = model.mse(&val_x, &val_y)?;
    Ok(vec![Record::new()
        .with("model", a.out.display().to_string())
        .with("points", model.num_points())
        .with("hashed_dim", model.hashed_dim())
        .with("bandwidth", bandwidth)
        .with("initial_train_mse", fitted.losses[0])
        .with("train_mse", *fitted.losses.last().unwrap_or(&f64::NAN))
        .with("val_mse", val_mse)
        .with("epochs", a.epochs)
        .with_all(record)])
}

fn cmd_build(a: &BuildArgs, seed: u64, threads: usize) -> Result<Vec<Record>> {
    let model = io::read_model(&a.model)?;
    let spec = LshEnsembleSpec {
        family: model.kernel().family,
        rows: a.rows,
        concat: model.kernel().concat,
        range: a.range,
        master_seed: seed,
    };
    spec.validate()?;
    let sketch = parallel::build_sketch(&model.export_points(), spec, model.projection().cloned(), threads)?;
    let bytes = sketch_to_bytes(&sketch);
    io::write_atomic(&a.out, &bytes)?;
    let (params, flops) = sketch_accounting(&sketch);
    Ok(vec![Record::new()
        .with("sketch", a.out.display().to_string())
        .with("rows", a.rows)
        .with("range", a.range)
        .with("params", params)
        .with("memory_bytes", params * metrics::BYTES_PER_PARAM)
        .with("memory_mb", (params * metrics::BYTES_PER_PARAM) as f64 / 1e6)
        .with("flops", flops)
        .with("file_bytes", bytes.len())])
}

/// `(params, flops)`: counters plus projection, and the projection, hashing and
/// aggregation cost of one query.
pub fn sketch_accounting(sketch: &RepresenterSketch) -> (u64, u64) {
    let spec = sketch.spec();
    let (rows, range, k) = (spec.rows as u64, spec.range as u64, spec.concat as u64);
    match sketch.projection() {
        Some(p) => {
            let (d, pd) = (p.data_dim() as u64, p.projected_dim() as u64);
            (metrics::sketch_params(rows, range, d, pd), metrics::sketch_flops(d, pd, k, range))
        }
        None => (
            metrics::sketch_params(rows, range, 0, 0),
            metrics::sketch_flops(0, sketch.point_dim() as u64, k, range),
        ),
    }
}

fn estimates(sketch: &RepresenterSketch, rows: &[Vec<f64>], est: Estimator, threads: usize) -> Result<Vec<f64>> {
    parallel::map(rows, threads, |q| sketch.query(q, est, false).map(|r| r.value))
        .into_iter()
        .map(|r| r.map_err(Error::from))
        .collect()
}

fn cmd_query(a: &QueryArgs, threads: usize) -> Result<Vec<Record>> {
    let sketch = io::read_sketch(&a.sketch)?;
    let data_args = DataArgs {
        dim: a.data.dim.or(Some(sketch.query_dim())),
        ..a.data.clone()
    };
    let dataset = load(&data_args)?;
    let est = a.estimator.resolve(sketch.rows());
    let values = estimates(&sketch, &dataset.features, est, threads)?;
    match &a.out {
        Some(path) => {
            io::write_scores(path, &values)?;
            Ok(vec![Record::new()
                .with("estimates", path.display().to_string())
                .with("rows", values.len())
                .with("estimator", estimator_name(est))])
        }
        None => Ok(values
            .iter()
            .enumerate()
            .map(|(i, v)| Record::new().with("row", i).with("estimate", *v))
            .collect()),
    }
}

fn estimator_name(est: Estimator) -> String {
    match est {
        Estimator::Mean => "mean".into(),
        Estimator::MedianOfMeans(g) => format!("mom(g={g})"),
    }
}

fn decisions(scores: &[f64], task: Task, mode: ThresholdMode) -> Result<Vec<f64>> {
    scores
        .iter()
        .map(|&s| distill::decide(s, task, mode).map_err(Error::from))
        .collect()
}

fn cmd_evaluate(a: &EvaluateArgs, threads: usize) -> Result<Outcome> {
    let sketch = io::read_sketch(&a.sketch)?;
    let data_args = DataArgs {
        dim: a.data.dim.or(Some(sketch.query_dim())),
        ..a.data.clone()
    };
    let dataset = load(&data_args)?;
    let task = dataset.task;
    let mode = match a.threshold {
        ThresholdArg::Probability => ThresholdMode::Probability,
        ThresholdArg::Sign => ThresholdMode::Sign,
    };
    let est = a.estimator.resolve(sketch.rows());
    let scores = estimates(&sketch, &dataset.features, est, threads)?;
    let preds = decisions(&scores, task, mode)?;
    let (params, flops) = sketch_accounting(&sketch);
    let report = metrics::evaluate(&preds, &dataset.labels, task)?.with_accounting(params, flops);
    let mut record = eval_record(&report).with("estimator", estimator_name(est));

    if let Some(path) = &a.model {
        let model = io::read_model(path)?;
        let exact: Vec<f64> = parallel::map(&dataset.features, threads, |q| model.predict(q))
            .into_iter()
            .collect::<rsketch_core::Result<_>>()?;
        let model_report = metrics::evaluate(&decisions(&exact, task, mode)?, &dataset.labels, task)?;
        record.push("model_value", model_report.value);
    }
    if let Some(hidden) = &a.nn_spec {
        let spec = MlpSpec::parse(dataset.feature_dim as u64, hidden, a.nn_outputs)?;
        let convention = match a.nn_flops {
            FlopArg::Mac => FlopConvention::MacIsOne,
            FlopArg::TwoMac => FlopConvention::MacIsTwo,
        };
        let nn_params = metrics::mlp_params(&spec);
        let nn_flops = metrics::mlp_flops(&spec, convention);
        record.push("nn_params", nn_params);
        record.push("nn_memory_mb", (nn_params * metrics::BYTES_PER_PARAM) as f64 / 1e6);
        record.push("nn_flops", nn_flops);
        record.push("params_reduction", metrics::reduction_ratio(nn_params, params));
        record.push("flops_reduction", metrics::reduction_ratio(nn_flops, flops));
    }
    let failure = a.require.and_then(|required| {
        let ok = match task {
            Task::BinaryClassification => report.value >= required,
            Task::Regression => report.value <= required,
        };
        (!ok).then(|| format!("{} {} does not meet the requirement {required}", report.metric.as_str(), report.value))
    });
    Ok(Outcome {
        records: vec![record],
        failure,
    })
}

fn roundtrip_check(path: &Path, kind: &str) -> Result<Record> {
    let bytes = io::read_bytes(path)?;
    let again = if kind == "sketch" {
        sketch_to_bytes(&sketch_from_bytes(&bytes)?)
    } else {
        model_to_bytes(&model_from_bytes(&bytes)?)
    };
    let identical = again == bytes;
    Ok(Record::new()
        .with("suite", "format")
        .with("check", format!("{kind} {}", path.display()))
        .with("passed", identical)
        .with(
            "detail",
            if identical {
                format!("{} bytes re-encode identically", bytes.len())
            } else {
                "re-encoded bytes differ".to_string()
            },
        ))
}

fn cmd_verify(a: &VerifyArgs, seed: u64, threads: usize) -> Result<Outcome> {
    let mut records = Vec::new();
    if a.sketch.is_some() || a.model.is_some() {
        if let Some(p) = &a.sketch {
            records.push(roundtrip_check(p, "sketch")?);
        }
        if let Some(p) = &a.model {
            records.push(roundtrip_check(p, "model")?);
        }
    } else {
        let settings = verify::Settings {
            seed,
            threads,
            quick: a.quick,
        };
        let suites: Vec<&str> = if a.suite.is_empty() {
            verify::SUITES.to_vec()
        } else {
            a.suite.iter().map(String::as_str).collect()
        };
        for suite in suites {
            for c in verify::run(suite, &settings)? {
                records.push(
                    Record::new()
                        .with("suite", c.suite)
                        .with("check", c.name)
                        .with("passed", c.passed)
                        .with("detail", c.detail),
                );
            }
        }
    }
    let failed: Vec<String> = records
        .iter()
        .filter(|r| r.get("passed") == Some(&serde_json::Value::Bool(false)))
        .map(|r| format!("{} / {}", cell_str(r.get("suite")), cell_str(r.get("check"))))
        .collect();
    let failure = (!failed.is_empty()).then(|| format!("verification failed: {}", failed.join(", ")));
    Ok(Outcome { records, failure })
}

fn cell_str(v: Option<&serde_json::Value>) -> String {
    v.and_then(|v| v.as_str()).unwrap_or_default().to_string()
}

fn cmd_dataset_info(a: &DatasetInfoArgs, seed: u64) -> Result<Vec<Record>> {
    let dataset = load(&a.data)?;
    let mut record = summary(&dataset, "all");
    let (mut parts, names) = match a.split {
        Some(f) => {
            let (train, test) = data::split(&dataset, f, seed)?;
            (vec![train, test], vec!["train", "test"])
        }
        None => (vec![dataset], vec!["all"]),
    };
    if let Some(mode) = a.scale {
        let scaler = Scaler::fit(&parts[0].features, mode)?;
        for p in &mut parts {
            scaler.apply(&mut p.features)?;
        }
    }
    let mut records = Vec::new();
    if parts.len() > 1 {
        records.push(std::mem::take(&mut record));
        records.extend(parts.iter().zip(&names).map(|(p, n)| summary(p, n)));
    } else {
        records.push(record);
    }
    if let Some(prefix) = &a.out_prefix {
        for (p, n) in parts.iter().zip(&names) {
            let suffix = if parts.len() > 1 { format!(".{n}.svm") } else { ".svm".into() };
            let mut path = prefix.clone().into_os_string();
            path.push(suffix);
            let mut buf = Vec::new();
            data::emit_libsvm(p, &mut buf).map_err(|e| Error::io(&path, e))?;
            io::write_atomic(Path::new(&path), &buf)?;
        }
    }
    Ok(records)
}

fn summary(d: &Dataset, part: &str) -> Record {
    let nonzeros: usize = d.features.iter().map(|r| r.iter().filter(|v| **v != 0.0).count()).sum();
    let cells = (d.len() * d.feature_dim).max(1);
    let mut r = Record::new()
        .with("part", part)
        .with("rows", d.len())
        .with("features", d.feature_dim)
        .with("density", nonzeros as f64 / cells as f64);
    match d.task {
        Task::BinaryClassification => {
            r.push("positives", d.positives());
            r.push("negatives", d.len() - d.positives());
        }
        Task::Regression => {
            let n = d.len().max(1) as f64;
            r.push("label_mean", d.labels.iter().sum::<f64>() / n);
            r.push("label_min", d.labels.iter().cloned().fold(f64::INFINITY, f64::min));
            r.push("label_max", d.labels.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn config_entries_follow_the_subcommand_and_yield_to_flags() {
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("c.conf");
        std::fs::write(&conf, "model = m.bin\nout = s.bin\nrows = 10\nrange = 4\nseed = 9\n").unwrap();
        let c = conf.to_str().unwrap();
        let args = strings(&["rsketch", "--seed", "3", "--config", c, "build", "--range", "8"]);
        let out = expand_config(args).unwrap();
        assert_eq!(
            out,
            strings(&[
                "rsketch", "--seed", "3", "--config", c, "build", "--model", "m.bin", "--out", "s.bin", "--rows", "10",
                "--range", "8"
            ])
        );
        let cli = Cli::try_parse_from(out).unwrap();
        let Command::Build(b) = cli.command else { panic!() };
        assert_eq!((b.rows, b.range, cli.seed), (10, 8, 3));
    }

    #[test]
    fn repeated_flags_take_the_last_value() {
        let cli = Cli::try_parse_from(["rsketch", "build", "--model", "m", "--out", "o", "--rows", "5", "--rows", "7"]).unwrap();
        let Command::Build(b) = cli.command else { panic!() };
        assert_eq!(b.rows, 7);
    }

    #[test]
    fn bandwidth_parsing() {
        assert_eq!("auto".parse::<Bandwidth>().unwrap(), Bandwidth::Auto);
        assert_eq!("1.5".parse::<Bandwidth>().unwrap(), Bandwidth::Fixed(1.5));
        assert!("-1".parse::<Bandwidth>().is_err());
    }
}
