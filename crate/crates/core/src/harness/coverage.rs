use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{run_replicates, Aggregate, Record, ResultTable, SimulationConfig};
use crate::error::{invalid, Result};
use crate::linreg::{
    build_statistic, dp_estimate, ols, preprocess, sanitize_statistic, DataTable, LinregMechanism,
    PreprocessConfig, RegressionDataset,
};
use crate::rng::RngStream;

/// `(0, −1.5, …, 1.5)`: zero intercept, slopes evenly spaced on
/// `[−1.5, 1.5]`.
pub fn coverage_beta(p: usize) -> Vec<f64> {
    let mut beta = vec![0.0];
    match p {
        0 => {}
        1 => beta.push(1.5),
        _ => beta.extend((0..p).map(|j| -1.5 + 3.0 * j as f64 / (p - 1) as f64)),
    }
    beta
}

/// Features uniform on `[-1,1]^p`, response `Xβ + N(0,1)`. The response is
/// not clipped.
pub fn simulated_regression<R: Rng + ?Sized>(
    n: usize,
    beta: &[f64],
    rng: &mut R,
) -> Result<RegressionDataset> {
    let p = beta.len() - 1;
    let features = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..=1.0));
    let response = DVector::from_fn(n, |i, _| {
        let mean: f64 = beta[0] + (0..p).map(|j| features[(i, j)] * beta[j + 1]).sum::<f64>();
        mean + rng.sample::<f64, _>(StandardNormal)
    });
    RegressionDataset::new_unbounded_response(crate::linreg::with_intercept(&features), response)
}

fn parse_mechanisms(names: &[String]) -> Result<Vec<LinregMechanism>> {
    names.iter().map(|n| LinregMechanism::parse(n)).collect()
}

fn covered(values: &[f64], intervals: &[(f64, f64)]) -> f64 {
    let hits = values
        .iter()
        .zip(intervals)
        .skip(1)
        .filter(|(v, (lo, hi))| lo <= *v && *v <= hi)
        .count();
    hits as f64 / (values.len() - 1) as f64
}

/// Fraction of the slope estimates that land inside the non-private 95%
/// t-intervals, averaged over replicates. The `mle` rows (infinite epsilon)
/// report the same fraction for the true coefficients.
pub fn simulate_coverage(cfg: &SimulationConfig) -> Result<ResultTable> {
    cfg.validate()?;
    if cfg.dim == 0 {
        return Err(invalid("coverage simulation needs at least one predictor"));
    }
    let mechs = parse_mechanisms(&cfg.mechanisms)?;
    let beta = coverage_beta(cfg.dim);
    let root = RngStream::new(cfg.seed, 0);
    let per_rep = run_replicates(cfg.replicates, |rep| {
        let stream = root.substream(&[rep as u64]);
        let data = simulated_regression(cfg.n, &beta, &mut stream.substream(&[0]).rng())?;
        let ci = ols(&data)?.confidence_intervals(0.95)?;
        let stat = build_statistic(&data);
        let mut rows = vec![Record {
            epsilon: f64::INFINITY,
            mechanism: "mle".into(),
            replicate: rep,
            metric: "coverage".into(),
            value: covered(&beta, &ci),
        }];
        for (ei, &eps) in cfg.epsilons.iter().enumerate() {
            for (mi, mech) in mechs.iter().enumerate() {
                let mut rng = stream.substream(&[1 + ei as u64, 1 + mi as u64]).rng();
                let noisy = sanitize_statistic(&stat, *mech, eps, &mut rng)?;
                rows.push(Record {
                    epsilon: eps,
                    mechanism: mech.label().into(),
                    replicate: rep,
                    metric: "coverage".into(),
                    value: covered(&dp_estimate(&noisy, data.n()), &ci),
                });
            }
        }
        Ok(rows)
    })?;
    Ok(ResultTable::new(
        cfg.echo(),
        per_rep.into_iter().flatten().collect(),
        Aggregate::Mean,
    ))
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Preprocess a CSV file and record `‖β_DP − β_MLE‖₂` for every
/// `(epsilon, mechanism, replicate)`; summaries are lower medians. The echo
/// carries the MLE and the zero-vector baseline `‖β_MLE‖₂`.
pub fn run_regression_file(
    cfg: &SimulationConfig,
    path: impl AsRef<Path>,
    pre: &PreprocessConfig,
) -> Result<ResultTable> {
    run_regression_table(cfg, &DataTable::from_csv_path(path)?, pre)
}

pub fn run_regression_table(
    cfg: &SimulationConfig,
    table: &DataTable,
    pre: &PreprocessConfig,
) -> Result<ResultTable> {
    cfg.validate()?;
    let mechs = parse_mechanisms(&cfg.mechanisms)?;
    let data = preprocess(table, pre)?;
    let stat = build_statistic(&data);
    let mle = dp_estimate(&stat, data.n());
    let root = RngStream::new(cfg.seed, 0);
    let per_rep = run_replicates(cfg.replicates, |rep| {
        let stream = root.substream(&[rep as u64]);
        let mut rows = Vec::new();
        for (ei, &eps) in cfg.epsilons.iter().enumerate() {
            for (mi, mech) in mechs.iter().enumerate() {
                let mut rng = stream.substream(&[1 + ei as u64, 1 + mi as u64]).rng();
                let noisy = sanitize_statistic(&stat, *mech, eps, &mut rng)?;
                rows.push(Record {
                    epsilon: eps,
                    mechanism: mech.label().into(),
                    replicate: rep,
                    metric: "l2_to_mle".into(),
                    value: l2_distance(&dp_estimate(&noisy, data.n()), &mle),
                });
            }
        }
        Ok(rows)
    })?;
    let mut echo = cfg.echo();
    echo[0].1 = super::Experiment::RegressionFile.label().into();
    echo[2].1 = data.n().to_string();
    echo[3].1 = data.predictors().to_string();
    echo.push(("response".into(), pre.response.clone()));
    echo.push(("log_columns".into(), pre.log_columns.join(";")));
    echo.push((
        "mle".into(),
        mle.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
    ));
    echo.push((
        "baseline_zero_l2_to_mle".into(),
        l2_distance(&vec![0.0; mle.len()], &mle).to_string(),
    ));
    Ok(ResultTable::new(
        echo,
        per_rep.into_iter().flatten().collect(),
        Aggregate::LowerMedian,
    ))
}

/// Coefficient CSV: the MLE and, per `(epsilon, mechanism)`, the private
/// estimate of replicate 0 (same stream as [`run_regression_table`]).
/// Columns are `epsilon,mechanism,intercept` followed by predictor names.
pub fn regression_coefficients(
    cfg: &SimulationConfig,
    table: &DataTable,
    pre: &PreprocessConfig,
) -> Result<String> {
    cfg.validate()?;
    let mechs = parse_mechanisms(&cfg.mechanisms)?;
    let data = preprocess(table, pre)?;
    let stat = build_statistic(&data);
    let row = |eps: f64, mech: &str, beta: &[f64]| {
        let vals: Vec<String> = beta.iter().map(f64::to_string).collect();
        format!("{eps},{mech},{}\n", vals.join(","))
    };
    let mut out = String::from("epsilon,mechanism,intercept");
    for name in table.names.iter().filter(|n| **n != pre.response) {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    out.push_str(&row(f64::INFINITY, "mle", &dp_estimate(&stat, data.n())));
    let stream = RngStream::new(cfg.seed, 0).substream(&[0]);
    for (ei, &eps) in cfg.epsilons.iter().enumerate() {
        for (mi, mech) in mechs.iter().enumerate() {
            let mut rng = stream.substream(&[1 + ei as u64, 1 + mi as u64]).rng();
            let noisy = sanitize_statistic(&stat, *mech, eps, &mut rng)?;
            out.push_str(&row(eps, mech.label(), &dp_estimate(&noisy, data.n())));
        }
    }
    Ok(out)
}
