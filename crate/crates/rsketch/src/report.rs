//! Command output: ordered key/value records rendered either as an aligned
//! text table or as one JSON object per line.

use rsketch_core::metrics::EvalReport;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    JsonLines,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Value)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<Value>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn with_all(mut self, other: Record) -> Self {
        self.0.extend(other.0);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn to_json_line(&self) -> String {
        let fields: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| format!("{}:{}", Value::from(k.as_str()), v))
            .collect();
        format!("{{{}}}", fields.join(","))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// A single record prints as a two-column key/value table; several records
/// print as one table with a header taken from the first record's keys.
pub fn render(records: &[Record], format: Format) -> String {
    match format {
        Format::JsonLines => records.iter().map(|r| r.to_json_line() + "\n").collect(),
        Format::Text => match records {
            [] => String::new(),
            [one] => table(&one.0.iter().map(|(k, v)| vec![k.clone(), cell(v)]).collect::<Vec<_>>()),
            many => {
                let header: Vec<String> = many[0].0.iter().map(|(k, _)| k.clone()).collect();
                let mut rows = vec![header.clone()];
                for r in many {
                    rows.push(header.iter().map(|k| r.get(k).map_or_else(String::new, cell)).collect());
                }
                table(&rows)
            }
        },
    }
}

pub fn eval_record(report: &EvalReport) -> Record {
    Record::new()
        .with("metric", report.metric.as_str())
        .with("value", report.value)
        .with("params", report.params)
        .with("memory_bytes", report.memory_bytes)
        .with("memory_mb", report.memory_mb())
        .with("flops", report.flops)
}
