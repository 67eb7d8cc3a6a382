use std::io::Read;

use nalgebra::{DMatrix, DVector};

use super::RegressionDataset;
use crate::error::{invalid, Error, Result};

/// Named numeric columns read from a CSV file with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl DataTable {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                found: columns.len(),
            });
        }
        if let Some(first) = columns.first() {
            if let Some((i, c)) = columns
                .iter()
                .enumerate()
                .find(|(_, c)| c.len() != first.len())
            {
                return Err(Error::Data {
                    row: c.len().min(first.len()),
                    column: names[i].clone(),
                    message: "ragged column".into(),
                });
            }
        }
        Ok(Self { names, columns })
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut columns = vec![Vec::new(); names.len()];
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Data {
                    row: row + 1,
                    column: names[j].clone(),
                    message: format!("not a number: `{field}`"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Data {
                        row: row + 1,
                        column: names[j].clone(),
                        message: format!("non-finite value `{field}`"),
                    });
                }
                columns[j].push(v);
            }
        }
        Self::new(names, columns)
    }

    pub fn from_csv_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    pub response: String,
    pub log_columns: Vec<String>,
    pub lower_q: f64,
    pub upper_q: f64,
}

impl PreprocessConfig {
    pub fn new(response: impl Into<String>) -> Self {
        Self {
            response: response.into(),
            log_columns: Vec::new(),
            lower_q: 0.0001,
            upper_q: 0.9999,
        }
    }

    pub fn with_log_columns(mut self, cols: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.log_columns = cols.into_iter().map(Into::into).collect();
        self
    }
}

/// Sample quantile by linear interpolation between order statistics
/// (`h = (n−1)q`). `sorted` must be ascending and nonempty.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Clamp to the `[lower_q, upper_q]` quantiles, returning the bounds used.
pub(crate) fn clamp_to_quantiles(values: &mut [f64], lower_q: f64, upper_q: f64) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = empirical_quantile(&sorted, lower_q);
    let hi = empirical_quantile(&sorted, upper_q);
    for v in values.iter_mut() {
        *v = v.clamp(lo, hi);
    }
    (lo, hi)
}

fn transform_column(
    name: &str,
    raw: &[f64],
    take_log: bool,
    cfg: &PreprocessConfig,
) -> Result<Vec<f64>> {
    let mut values = raw.to_vec();
    if take_log {
        for (i, v) in values.iter_mut().enumerate() {
            if *v <= 0.0 {
                return Err(Error::Data {
                    row: i + 1,
                    column: name.to_string(),
                    message: format!("log of nonpositive value {v}"),
                });
            }
            *v = v.ln();
        }
    }
    clamp_to_quantiles(&mut values, cfg.lower_q, cfg.upper_q);
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if !(max > min) {
        return Err(Error::Data {
            row: 0,
            column: name.to_string(),
            message: "column is constant after clamping".into(),
        });
    }
    Ok(values
        .iter()
        .map(|v| (2.0 * (v - min) / (max - min) - 1.0).clamp(-1.0, 1.0))
        .collect())
}

/// Log-transform, clamp and rescale every column to `[-1, 1]`. The response
/// column is named in the config; all remaining columns become predictors
/// in table order.
pub fn preprocess(table: &DataTable, cfg: &PreprocessConfig) -> Result<RegressionDataset> {
    if !(0.0 <= cfg.lower_q && cfg.lower_q < cfg.upper_q && cfg.upper_q <= 1.0) {
        return Err(invalid(format!(
            "need 0 <= lower_q < upper_q <= 1, got {} and {}",
            cfg.lower_q, cfg.upper_q
        )));
    }
    if table.rows() == 0 {
        return Err(invalid("table has no rows"));
    }
    for name in &cfg.log_columns {
        if table.column(name).is_none() {
            return Err(invalid(format!("unknown log column `{name}`")));
        }
    }
    let response_idx = table
        .names
        .iter()
        .position(|n| *n == cfg.response)
        .ok_or_else(|| invalid(format!("response column `{}` not found", cfg.response)))?;

    let mut predictors = Vec::new();
    let mut response = Vec::new();
    for (j, (name, col)) in table.names.iter().zip(&table.columns).enumerate() {
        let out = transform_column(name, col, cfg.log_columns.contains(name), cfg)?;
        if j == response_idx {
            response = out;
        } else {
            predictors.push(out);
        }
    }
    if predictors.is_empty() {
        return Err(invalid("table has no predictor columns"));
    }
    let n = table.rows();
    let design = DMatrix::from_fn(n, predictors.len() + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            predictors[j - 1][i]
        }
    });
    RegressionDataset::new(design, DVector::from_vec(response))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(cols: Vec<(&str, Vec<f64>)>) -> DataTable {
        let (names, columns) = cols.into_iter().map(|(n, c)| (n.to_string(), c)).unzip();
        DataTable::new(names, columns).unwrap()
    }

    #[test]
    fn endpoints_map_to_unit_interval() {
        let x: Vec<f64> = (1..=10_000).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 0.37).sin()).collect();
        let ds = preprocess(
            &table(vec![("x", x), ("y", y)]),
            &PreprocessConfig::new("y"),
        )
        .unwrap();
        let col = ds.design().column(1);
        assert_eq!(col.min(), -1.0);
        assert_eq!(col.max(), 1.0);
        assert!(ds.design().column(0).iter().all(|v| *v == 1.0));
    }

    #[test]
    fn outlier_is_clamped_before_scaling() {
        let mut x: Vec<f64> = (0..20_000).map(|i| (i % 100) as f64).collect();
        x[5] = 1e9;
        let mut sorted = x.clone();
        sorted.sort_by(f64::total_cmp);
        let q_hi = empirical_quantile(&sorted, 0.9999);
        assert!(q_hi < 1e9);
        let y: Vec<f64> = (0..20_000).map(|i| (i % 7) as f64).collect();
        let ds = preprocess(
            &table(vec![("x", x.clone()), ("y", y)]),
            &PreprocessConfig::new("y"),
        )
        .unwrap();
        // the outlier lands exactly on +1, alongside the quantile itself
        assert_eq!(ds.design()[(5, 1)], 1.0);
        // ordinary values keep their spacing relative to the clamped range
        let lo = empirical_quantile(&sorted, 0.0001);
        let expect = 2.0 * (50.0 - lo) / (q_hi - lo) - 1.0;
        let i50 = x.iter().position(|v| *v == 50.0).unwrap();
        assert!((ds.design()[(i50, 1)] - expect).abs() < 1e-12);
    }

    #[test]
    fn unit_column_round_trip() {
        let x = vec![-0.5, 0.0, 0.25, 0.5];
        let cfg = PreprocessConfig {
            lower_q: 0.0,
            upper_q: 1.0,
            ..PreprocessConfig::new("y")
        };
        let ds = preprocess(
            &table(vec![("x", x.clone()), ("y", vec![0.0, 1.0, 2.0, 3.0])]),
            &cfg,
        )
        .unwrap();
        for (i, v) in x.iter().enumerate() {
            assert!((ds.design()[(i, 1)] - (2.0 * (v + 0.5) / 1.0 - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_column_is_rejected_by_name() {
        let err = preprocess(
            &table(vec![
                ("flat", vec![3.0; 10]),
                ("y", (0..10).map(f64::from).collect()),
            ]),
            &PreprocessConfig::new("y"),
        )
        .unwrap_err();
        assert!(err.to_string().contains("flat"), "{err}");
    }

    #[test]
    fn log_columns() {
        let x = vec![1.0, std::f64::consts::E, std::f64::consts::E.powi(2)];
        let cfg = PreprocessConfig {
            lower_q: 0.0,
            upper_q: 1.0,
            ..PreprocessConfig::new("y")
        }
        .with_log_columns(["x"]);
        let ds = preprocess(&table(vec![("x", x), ("y", vec![0.0, 1.0, 2.0])]), &cfg).unwrap();
        assert!((ds.design()[(1, 1)]).abs() < 1e-12);
        let bad = table(vec![("x", vec![0.0, 1.0, 2.0]), ("y", vec![0.0, 1.0, 2.0])]);
        assert!(preprocess(&bad, &cfg).is_err());
    }

    #[test]
    fn csv_ingestion() {
        let text = "price,rooms,garage\n100,3,1\n250,4,0\n175,2,1\n";
        let t = DataTable::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(t.names, ["price", "rooms", "garage"]);
        assert_eq!(t.column("rooms").unwrap(), [3.0, 4.0, 2.0]);
        let err = DataTable::from_csv_reader("a,b\n1,x\n".as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('b') && msg.contains('1'), "{msg}");
    }

    #[test]
    fn interpolated_quantile() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(empirical_quantile(&s, 0.0), 1.0);
        assert_eq!(empirical_quantile(&s, 1.0), 4.0);
        assert!((empirical_quantile(&s, 0.5) - 2.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn clamping_is_idempotent(mut v in prop::collection::vec(-1e3f64..1e3, 2..200),
                                  lq in 0.0f64..0.2, uq in 0.8f64..1.0) {
            let (lo, hi) = clamp_to_quantiles(&mut v, lq, uq);
            let once = v.clone();
            for x in v.iter_mut() {
                *x = x.clamp(lo, hi);
            }
            prop_assert_eq!(&once, &v);
        }
    }
}
