//! Seeded simulation runner.
//!
//! Every experiment returns a [`ResultTable`]: long-form rows
//! `(epsilon, mechanism, replicate, metric, value)` plus aggregated summary
//! rows, both preceded by `#` lines echoing the configuration. Replicates
//! run in parallel on independent substreams and are reassembled in
//! replicate order, so output is identical for identical configurations.

mod coverage;
mod diagnostics;
mod logistic;
mod mechanisms;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{invalid, Result};
use crate::stats::{lower_median, mean};

pub use coverage::{
    coverage_beta, regression_coefficients, run_regression_file, run_regression_table,
    simulate_coverage, simulated_regression,
};
pub use diagnostics::{
    diagnostics, dp_histogram_ratio, DiagnosticEntry, DiagnosticsReport, Fault, RatioOutcome,
};
pub use logistic::{logistic_beta, simulate_logistic, simulated_logistic_data};
pub use mechanisms::{comparison_csv, sample_csv, sample_draws};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Logistic,
    Coverage,
    RegressionFile,
    Compare,
    Sample,
    Diagnostics,
}

impl Experiment {
    pub fn label(&self) -> &'static str {
        match self {
            Experiment::Logistic => "logistic",
            Experiment::Coverage => "coverage",
            Experiment::RegressionFile => "regression-file",
            Experiment::Compare => "compare",
            Experiment::Sample => "sample",
            Experiment::Diagnostics => "diagnostics",
        }
    }
}

/// Inputs shared by all experiments. `dim` is `m` for logistic runs and the
/// predictor count `p` for regression runs.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub dim: usize,
    pub epsilons: Vec<f64>,
    pub replicates: usize,
    pub mechanisms: Vec<String>,
    pub q: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// `{1/64, 1/32, …, 2}`
pub fn logistic_epsilon_grid() -> Vec<f64> {
    (-6..=1).map(|k| 2f64.powi(k)).collect()
}

/// `{1/16, 1/8, …, 4}`
pub fn coverage_epsilon_grid() -> Vec<f64> {
    (-4..=2).map(|k| 2f64.powi(k)).collect()
}

impl SimulationConfig {
    pub fn logistic() -> Self {
        Self {
            experiment: Experiment::Logistic,
            n: 10_000,
            dim: 7,
            epsilons: logistic_epsilon_grid(),
            replicates: 100,
            mechanisms: vec!["l1".into(), "l2".into(), "linf".into()],
            q: 0.5,
            seed: 0,
            out: None,
        }
    }

    pub fn coverage() -> Self {
        Self {
            experiment: Experiment::Coverage,
            n: 10_000,
            dim: 5,
            epsilons: coverage_epsilon_grid(),
            replicates: 200,
            mechanisms: vec!["l1".into(), "linf".into(), "kt".into()],
            q: 0.5,
            seed: 0,
            out: None,
        }
    }

    pub fn regression_file() -> Self {
        Self {
            experiment: Experiment::RegressionFile,
            epsilons: coverage_epsilon_grid(),
            replicates: 100,
            ..Self::coverage()
        }
    }

    pub fn diagnostics() -> Self {
        Self {
            experiment: Experiment::Diagnostics,
            n: 10_000,
            dim: 2,
            epsilons: vec![1.0],
            replicates: 1,
            mechanisms: vec!["l1".into(), "l2".into(), "linf".into(), "rejection".into()],
            q: 0.5,
            seed: 0,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(invalid("replicate count must be at least 1"));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(invalid(format!(
                "epsilon values must be positive and finite, got {e}"
            )));
        }
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        Ok(())
    }

    /// Configuration echo rows written at the top of every output table.
    pub fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("experiment".into(), self.experiment.label().into()),
            ("seed".into(), self.seed.to_string()),
            ("n".into(), self.n.to_string()),
            ("dim".into(), self.dim.to_string()),
            ("epsilons".into(), join(&self.epsilons)),
            ("replicates".into(), self.replicates.to_string()),
            ("mechanisms".into(), self.mechanisms.join(";")),
            ("q".into(), self.q.to_string()),
        ]
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

/// One long-form observation. Non-private reference rows use an infinite
/// epsilon.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub epsilon: f64,
    pub mechanism: String,
    pub replicate: usize,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    LowerMedian,
    Mean,
}

impl Aggregate {
    pub fn label(&self) -> &'static str {
        match self {
            Aggregate::LowerMedian => "median",
            Aggregate::Mean => "mean",
        }
    }

    fn apply(&self, xs: &[f64]) -> f64 {
        match self {
            Aggregate::LowerMedian => lower_median(xs),
            Aggregate::Mean => mean(xs),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub epsilon: f64,
    pub mechanism: String,
    pub metric: String,
    pub aggregate: Aggregate,
    pub value: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ResultTable {
    pub echo: Vec<(String, String)>,
    pub records: Vec<Record>,
    pub summary: Vec<SummaryRow>,
}

impl ResultTable {
    pub(crate) fn new(
        echo: Vec<(String, String)>,
        records: Vec<Record>,
        aggregate: Aggregate,
    ) -> Self {
        let summary = summarize(&records, aggregate);
        Self {
            echo,
            records,
            summary,
        }
    }

    /// Summary value for one `(epsilon, mechanism, metric)` cell.
    pub fn summary_value(&self, epsilon: f64, mechanism: &str, metric: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.epsilon == epsilon && s.mechanism == mechanism && s.metric == metric)
            .map(|s| s.value)
    }

    pub fn echo_value(&self, key: &str) -> Option<&str> {
        self.echo
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn echo_lines(&self, out: &mut String) {
        for (k, v) in &self.echo {
            let _ = writeln!(out, "# {k}={v}");
        }
    }

    pub fn long_csv(&self) -> String {
        let mut out = String::new();
        self.echo_lines(&mut out);
        out.push_str("epsilon,mechanism,replicate,metric,value\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.epsilon, r.mechanism, r.replicate, r.metric, r.value
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::new();
        self.echo_lines(&mut out);
        out.push_str("epsilon,mechanism,metric,aggregate,value,count\n");
        for s in &self.summary {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.epsilon,
                s.mechanism,
                s.metric,
                s.aggregate.label(),
                s.value,
                s.count
            );
        }
        out
    }

    /// Write the long table to `path` and the summary next to it with a
    /// `_summary` suffix. Returns both paths.
    pub fn write(&self, path: &Path) -> Result<(PathBuf, PathBuf)> {
        let summary_path = summary_path(path);
        std::fs::File::create(path)?.write_all(self.long_csv().as_bytes())?;
        std::fs::File::create(&summary_path)?.write_all(self.summary_csv().as_bytes())?;
        Ok((path.to_path_buf(), summary_path))
    }
}

pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_summary.{}", ext.to_string_lossy()),
        None => format!("{stem}_summary"),
    };
    path.with_file_name(name)
}

/// Group by `(epsilon, mechanism, metric)` in first-appearance order.
fn summarize(records: &[Record], aggregate: Aggregate) -> Vec<SummaryRow> {
    let mut keys: Vec<(f64, &str, &str)> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for r in records {
        let key = (r.epsilon, r.mechanism.as_str(), r.metric.as_str());
        match keys.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(r.value),
            None => {
                keys.push(key);
                groups.push(vec![r.value]);
            }
        }
    }
    keys.into_iter()
        .zip(groups)
        .map(|((epsilon, mechanism, metric), values)| SummaryRow {
            epsilon,
            mechanism: mechanism.to_string(),
            metric: metric.to_string(),
            aggregate,
            value: aggregate.apply(&values),
            count: values.len(),
        })
        .collect()
}

/// Run `f` on every replicate index in parallel, preserving index order.
pub(crate) fn run_replicates<T, F>(replicates: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..replicates).into_par_iter().map(f).collect()
}
