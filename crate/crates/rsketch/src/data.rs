//! libsvm text ingestion, splitting and feature scaling.
//!
//! Rows are densified at parse time. Classification labels are normalized to
//! `{0, 1}` with the larger raw label as the positive class, which covers the
//! `{-1, +1}`, `{0, 1}` and `{1, 2}` conventions found in the wild.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rsketch_core::Task;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub feature_dim: usize,
    pub task: Task,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_dim: self.feature_dim,
            task: self.task,
        }
    }

    /// Number of rows labelled 1 (classification only).
    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1.0).count()
    }
}

struct Row {
    label: f64,
    entries: Vec<(usize, f64)>,
}

fn parse_line(text: &str) -> std::result::Result<Option<Row>, String> {
    let text = text.split('#').next().unwrap_or("");
    let mut tokens = text.split_whitespace();
    let Some(label) = tokens.next() else {
        return Ok(None);
    };
    let label: f64 = label.parse().map_err(|_| format!("bad label {label:?}"))?;
    if !label.is_finite() {
        return Err(format!("non-finite label {label}"));
    }
    let mut entries = Vec::new();
    let mut last = 0usize;
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| format!("malformed token {tok:?}, expected index:value"))?;
        let idx: usize = idx.parse().map_err(|_| format!("bad feature index in {tok:?}"))?;
        if idx == 0 {
            return Err("feature indices are 1-based; found index 0".into());
        }
        if idx <= last {
            return Err(format!("feature index {idx} does not increase (previous {last})"));
        }
        let val: f64 = val.parse().map_err(|_| format!("bad feature value in {tok:?}"))?;
        if !val.is_finite() {
            return Err(format!("non-finite feature value in {tok:?}"));
        }
        entries.push((idx, val));
        last = idx;
    }
    Ok(Some(Row { label, entries }))
}

/// Maps raw binary labels onto `{0, 1}`: with two distinct values the larger is
/// positive; a single value counts as positive iff it is greater than zero.
fn normalize_labels(labels: &mut [f64]) -> std::result::Result<(), String> {
    let mut values = labels.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    match values.as_slice() {
        [] => {}
        [only] => {
            let mapped = if *only > 0.0 { 1.0 } else { 0.0 };
            labels.iter_mut().for_each(|y| *y = mapped);
        }
        [neg, _] => labels.iter_mut().for_each(|y| *y = if *y == *neg { 0.0 } else { 1.0 }),
        many => return Err(format!("expected a binary task, found {} distinct labels", many.len())),
    }
    Ok(())
}

/// Parses libsvm text. `dim` fixes the feature dimension; without it the
/// largest index seen is used. Blank and comment-only lines are skipped.
pub fn parse_libsvm(reader: impl BufRead, source: &Path, task: Task, dim: Option<usize>) -> Result<Dataset> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        reason,
    };
    let mut rows = Vec::new();
    let mut line_numbers = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if let Some(row) = parse_line(&line).map_err(|r| parse_err(i + 1, r))? {
            rows.push(row);
            line_numbers.push(i + 1);
        }
    }
    let max_index = rows.iter().filter_map(|r| r.entries.last().map(|e| e.0)).max().unwrap_or(0);
    let feature_dim = match dim {
        Some(d) => {
            if let Some(pos) = rows.iter().position(|r| r.entries.last().is_some_and(|e| e.0 > d)) {
                return Err(parse_err(
                    line_numbers[pos],
                    format!("feature index exceeds the declared dimension {d}"),
                ));
            }
            d
        }
        None => max_index,
    };
    let mut features = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for row in rows {
        let mut dense = vec![0.0; feature_dim];
        for (idx, val) in row.entries {
            dense[idx - 1] = val;
        }
        features.push(dense);
        labels.push(row.label);
    }
    if task == Task::BinaryClassification {
        normalize_labels(&mut labels).map_err(|r| Error::input(format!("{}: {r}", source.display())))?;
    }
    Ok(Dataset {
        features,
        labels,
        feature_dim,
        task,
    })
}

/// Writes libsvm text, omitting zero entries. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn emit_libsvm(dataset: &Dataset, mut out: impl Write) -> std::io::Result<()> {
    for (row, label) in dataset.features.iter().zip(&dataset.labels) {
        write!(out, "{label}")?;
        for (i, v) in row.iter().enumerate() {
            if *v != 0.0 {
                write!(out, " {}:{v}", i + 1)?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Splits `0..n` into sorted `(train, test)` index sets. Classification splits
/// are stratified: each class contributes its share of the test set, rounded by
/// largest remainder so the total is `round(n * test_fraction)` exactly.
pub fn split_indices(labels: &[f64], task: Task, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::input(format!("test fraction must be in (0, 1), got {test_fraction}")));
    }
    let n = labels.len();
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(Error::input(format!(
            "splitting {n} rows at fraction {test_fraction} leaves one side empty"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strata: Vec<Vec<usize>> = match task {
        Task::Regression => vec![(0..n).collect()],
        Task::BinaryClassification => {
            let (pos, neg): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| labels[i] == 1.0);
            vec![neg, pos]
        }
    };
    let exact: Vec<f64> = strata.iter().map(|s| s.len() as f64 * n_test as f64 / n as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..strata.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let short = n_test - quota.iter().sum::<usize>();
    for &s in order.iter().take(short) {
        quota[s] += 1;
    }

    let (mut train, mut test) = (Vec::with_capacity(n - n_test), Vec::with_capacity(n_test));
    for (mut stratum, q) in strata.into_iter().zip(quota) {
        stratum.shuffle(&mut rng);
        test.extend_from_slice(&stratum[..q]);
        train.extend_from_slice(&stratum[q..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(&dataset.labels, dataset.task, test_fraction, seed)?;
    Ok((dataset.select(&train), dataset.select(&test)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    MinMax,
    ZScore,
}

impl std::str::FromStr for ScaleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minmax" | "min-max" => Ok(ScaleMode::MinMax),
            "zscore" | "z-score" => Ok(ScaleMode::ZScore),
            other => Err(Error::input(format!("unknown scaling mode {other:?}"))),
        }
    }
}

/// Per-feature affine map `(x - shift) / scale`; constant features map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mode: ScaleMode,
    shift: Vec<f64>,
    scale: Vec<f64>,
}

impl Scaler {
    pub fn fit(rows: &[Vec<f64>], mode: ScaleMode) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::input("cannot fit a scaler on no rows"))?;
        let d = first.len();
        let (mut shift, mut scale) = (vec![0.0; d], vec![0.0; d]);
        for j in 0..d {
            let col = rows.iter().map(|r| r[j]);
            match mode {
                ScaleMode::MinMax => {
                    let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                    shift[j] = lo;
                    scale[j] = hi - lo;
                }
                ScaleMode::ZScore => {
                    let n = rows.len() as f64;
                    let mean = col.clone().sum::<f64>() / n;
                    let var = col.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                    shift[j] = mean;
                    scale[j] = var.sqrt();
                }
            }
        }
        Ok(Self { mode, shift, scale })
    }

    pub fn apply(&self, rows: &mut [Vec<f64>]) -> Result<()> {
        for row in rows {
            if row.len() != self.shift.len() {
                return Err(rsketch_core::Error::DimensionMismatch {
                    expected: self.shift.len(),
                    got: row.len(),
                }
                .into());
            }
            for ((v, s), c) in row.iter_mut().zip(&self.shift).zip(&self.scale) {
                *v = if *c > 0.0 { (*v - s) / c } else { 0.0 };
            }
        }
        Ok(())
    }
}

/// Opens a plain or gzip-compressed libsvm file (detected by magic bytes).
pub fn load_libsvm(path: &Path, task: Task, dim: Option<usize>) -> Result<Dataset> {
    let reader = crate::io::open_maybe_gzip(path)?;
    parse_libsvm(reader, path, task, dim)
}
