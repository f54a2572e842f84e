//! File access: gzip-aware readers, atomic writes, sketch/model files, teacher
//! scores and `key=value` config files.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use rsketch_core::codec::{model_from_bytes, model_to_bytes, sketch_from_bytes, sketch_to_bytes};
use rsketch_core::distill::KernelModel;
use rsketch_core::RepresenterSketch;

use crate::error::{Error, Result};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Buffered reader over `path`, decompressing when the file starts with the gzip magic.
pub fn open_maybe_gzip(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let head = reader.fill_buf().map_err(|e| Error::io(path, e))?;
    if head.starts_with(&GZIP_MAGIC) {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(reader))))
    } else {
        Ok(Box::new(reader))
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

/// Writes through a temporary file in the destination directory and renames it
/// into place, so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_sketch(path: &Path) -> Result<RepresenterSketch> {
    Ok(sketch_from_bytes(&read_bytes(path)?)?)
}

pub fn write_sketch(path: &Path, sketch: &RepresenterSketch) -> Result<()> {
    write_atomic(path, &sketch_to_bytes(sketch))
}

pub fn read_model(path: &Path) -> Result<KernelModel> {
    Ok(model_from_bytes(&read_bytes(path)?)?)
}

pub fn write_model(path: &Path, model: &KernelModel) -> Result<()> {
    write_atomic(path, &model_to_bytes(model))
}

/// One decimal score per line; blank lines are not allowed. `expected` is the
/// number of dataset rows the scores must pair with.
pub fn read_scores(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let reader = open_maybe_gzip(path)?;
    let mut scores = Vec::with_capacity(expected);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let text = line.trim();
        let value: f64 = text.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason: format!("expected one score per line, found {text:?}"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                reason: format!("non-finite score {value}"),
            });
        }
        scores.push(value);
    }
    if scores.len() != expected {
        return Err(Error::input(format!(
            "{} has {} scores but the dataset has {} rows",
            path.display(),
            scores.len(),
            expected
        )));
    }
    Ok(scores)
}

pub fn write_scores(path: &Path, scores: &[f64]) -> Result<()> {
    let mut text = String::with_capacity(scores.len() * 20);
    for s in scores {
        text.push_str(&format!("{s}\n"));
    }
    write_atomic(path, text.as_bytes())
}

/// Parses `key = value` lines (`#` starts a comment) into command-line tokens
/// `--key value`. A value of `true` yields the bare flag; `false` drops it.
pub fn config_to_args(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut args = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason: format!("expected key=value, found {line:?}"),
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value.to_string());
            }
        }
    }
    Ok(args)
}
