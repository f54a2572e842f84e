//! Accuracy / MAE and the parameter, memory and FLOP accounting used to compare
//! a sketch against the dense network it replaces.

use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::Task;

/// Bytes per stored parameter (everything is kept as 64-bit).
pub const BYTES_PER_PARAM: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricName {
    Accuracy,
    Mae,
}

impl MetricName {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Accuracy => "accuracy",
            MetricName::Mae => "mae",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub metric: MetricName,
    pub value: f64,
    pub params: u64,
    pub memory_bytes: u64,
    pub flops: u64,
}

impl EvalReport {
    pub fn with_accounting(mut self, params: u64, flops: u64) -> Self {
        self.params = params;
        self.memory_bytes = params * BYTES_PER_PARAM;
        self.flops = flops;
        self
    }

    /// Memory in (decimal) megabytes.
    pub fn memory_mb(&self) -> f64 {
        self.memory_bytes as f64 / 1e6
    }
}

/// Accuracy (fraction of exact matches) for classification, mean absolute error for regression.
pub fn evaluate(predictions: &[f64], labels: &[f64], task: Task) -> Result<EvalReport> {
    check_dim(labels.len(), predictions.len())?;
    if labels.is_empty() {
        return Err(Error::input("nothing to evaluate"));
    }
    let n = labels.len() as f64;
    let (metric, value) = match task {
        Task::BinaryClassification => {
            let correct = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
            (MetricName::Accuracy, correct as f64 / n)
        }
        Task::Regression => {
            let total: f64 = predictions.iter().zip(labels).map(|(p, l)| (p - l).abs()).sum();
            (MetricName::Mae, total / n)
        }
    };
    Ok(EvalReport {
        metric,
        value,
        params: 0,
        memory_bytes: 0,
        flops: 0,
    })
}

/// Counters plus projection: `R * L + d * p`.
pub fn sketch_params(rows: u64, range: u64, data_dim: u64, projected_dim: u64) -> u64 {
    range * rows + data_dim * projected_dim
}

/// Projection, hashing and aggregation cost: `2 d p + floor(p K R / 3) + R`.
///
/// The middle term models a sparse projection with two thirds zeros. The formula
/// is kept in its published form, including the use of `R` where the number of
/// aggregated rows would also be a natural reading.
pub fn sketch_flops(data_dim: u64, projected_dim: u64, concat: u64, range: u64) -> u64 {
    2 * data_dim * projected_dim + projected_dim * concat * range / 3 + range
}

/// Dense multilayer perceptron shape, used only for accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub input_dim: u64,
    pub hidden: Vec<u64>,
    pub output_dim: u64,
}

impl MlpSpec {
    pub fn new(input_dim: u64, hidden: Vec<u64>, output_dim: u64) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || hidden.contains(&0) {
            return Err(Error::input("layer sizes must be positive"));
        }
        Ok(Self {
            input_dim,
            hidden,
            output_dim,
        })
    }

    /// Parses hidden sizes written as `512/256/128` (an empty string means no hidden layer).
    pub fn parse(input_dim: u64, hidden: &str, output_dim: u64) -> Result<Self> {
        let sizes = if hidden.trim().is_empty() {
            Vec::new()
        } else {
            hidden
                .split('/')
                .map(|s| {
                    s.trim()
                        .parse::<u64>()
                        .map_err(|_| Error::input(alloc::format!("bad hidden layer size {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        Self::new(input_dim, sizes, output_dim)
    }

    fn layers(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let mut sizes = Vec::with_capacity(self.hidden.len() + 2);
        sizes.push(self.input_dim);
        sizes.extend_from_slice(&self.hidden);
        sizes.push(self.output_dim);
        (0..sizes.len() - 1).map(move |i| (sizes[i], sizes[i + 1]))
    }
}

/// How a multiply-add counts toward FLOPs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlopConvention {
    /// One fused multiply-add is one FLOP (the convention of common profilers).
    #[default]
    MacIsOne,
    /// A multiply-add is two FLOPs.
    MacIsTwo,
}

/// Weights plus biases: `sum(fan_in * fan_out + fan_out)`.
pub fn mlp_params(spec: &MlpSpec) -> u64 {
    spec.layers().map(|(i, o)| i * o + o).sum()
}

pub fn mlp_flops(spec: &MlpSpec, convention: FlopConvention) -> u64 {
    let macs: u64 = spec.layers().map(|(i, o)| i * o).sum();
    match convention {
        FlopConvention::MacIsOne => macs,
        FlopConvention::MacIsTwo => 2 * macs,
    }
}

/// `baseline / compressed`.
pub fn reduction_ratio(baseline: u64, compressed: u64) -> f64 {
    baseline as f64 / compressed as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn sketch_accounting_examples() {
        assert_eq!(sketch_params(2000, 20, 0, 0), 40_000);
        assert_eq!(sketch_params(0, 20, 7, 3), 21);
        assert_eq!(sketch_flops(0, 0, 1, 100), 100);
        // Projection term doubles with p; hashing term is linear too.
        assert_eq!(sketch_flops(10, 6, 3, 30) - 30 - 6 * 3 * 30 / 3, 2 * (sketch_flops(10, 3, 3, 30) - 30 - 3 * 3 * 30 / 3));
    }

    #[test]
    fn mlp_accounting_examples() {
        let single = MlpSpec::new(10, vec![], 1).unwrap();
        assert_eq!(mlp_params(&single), 11);
        assert_eq!(mlp_flops(&single, FlopConvention::MacIsTwo), 20);
        assert_eq!(mlp_flops(&single, FlopConvention::MacIsOne), 10);
        let empty = MlpSpec::parse(37, "", 1).unwrap();
        assert_eq!(mlp_params(&empty), 38);
        assert!(MlpSpec::parse(3, "4/x", 1).is_err());
        assert!(MlpSpec::new(3, vec![0], 1).is_err());
    }

    #[test]
    fn adult_network_size() {
        let adult = MlpSpec::parse(123, "512/256/128", 1).unwrap();
        // 123*512+512 + 512*256+256 + 256*128+128 + 128+1
        assert_eq!(mlp_params(&adult), 227_841);
        assert_eq!(mlp_flops(&adult, FlopConvention::MacIsOne), 226_944);
    }

    #[test]
    fn evaluate_examples() {
        let r = evaluate(&[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0], Task::BinaryClassification).unwrap();
        assert_eq!((r.metric, r.value), (MetricName::Accuracy, 1.0));
        let r = evaluate(&[0.0, 1.0], &[1.0, 0.0], Task::BinaryClassification).unwrap();
        assert_eq!(r.value, 0.0);
        let r = evaluate(&[2.0, -1.0], &[2.0, -1.0], Task::Regression).unwrap();
        assert_eq!((r.metric, r.value), (MetricName::Mae, 0.0));
        assert!(evaluate(&[1.0], &[1.0, 2.0], Task::Regression).is_err());
        let r = r.with_accounting(2048, 3801);
        assert_eq!(r.memory_bytes, 2048 * 8);
    }
}
