use std::io::Read;

use super::Example;
use crate::error::{Error, Result};

/// Examples from CSV rows laid out as `x₁,…,x_m,label`. With `has_header`
/// the first row is skipped.
pub fn examples_from_csv<R: Read>(reader: R, has_header: bool) -> Result<Vec<Example>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let values: Vec<f64> = record
            .iter()
            .enumerate()
            .map(|(j, f)| {
                f.parse().map_err(|_| Error::Data {
                    row,
                    column: format!("{}", j + 1),
                    message: format!("not a number: `{f}`"),
                })
            })
            .collect::<Result<_>>()?;
        let (label, features) = values.split_last().ok_or_else(|| Error::Data {
            row,
            column: "1".into(),
            message: "empty row".into(),
        })?;
        if let Some(first) = out.first().map(|e: &Example| e.features.len()) {
            if first != features.len() {
                return Err(Error::Data {
                    row,
                    column: "label".into(),
                    message: format!("expected {} features, found {}", first, features.len()),
                });
            }
        }
        out.push(Example::new(features.to_vec(), *label));
    }
    Ok(out)
}

/// A parameter vector as one CSV row.
pub fn theta_csv_row(theta: &[f64]) -> String {
    let mut s = theta
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    s.push('\n');
    s
}
