use std::fmt::Write as _;

use crate::error::Result;
use crate::ordering::ComparisonReport;
use crate::rng::RngStream;
use crate::sampling::MechanismConfig;

/// `n` noise draws (centred at zero) with their gauges.
pub fn sample_draws(
    config: &MechanismConfig,
    n: usize,
    stream: RngStream,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut rng = stream.rng();
    (0..n)
        .map(|_| {
            let v = config.sample_noise(&mut rng)?;
            let g = config.ball().gauge(&v)?;
            Ok((v, g))
        })
        .collect()
}

/// CSV with header `replicate,v1,…,vm,gauge`.
pub fn sample_csv(config: &MechanismConfig, n: usize, stream: RngStream) -> Result<String> {
    let draws = sample_draws(config, n, stream)?;
    let mut out = String::from("replicate");
    for j in 1..=config.dim() {
        let _ = write!(out, ",v{j}");
    }
    out.push_str(",gauge\n");
    for (i, (v, g)) in draws.iter().enumerate() {
        let _ = write!(out, "{i}");
        for x in v {
            let _ = write!(out, ",{x}");
        }
        let _ = writeln!(out, ",{g}");
    }
    Ok(out)
}

/// The comparison as a two-line CSV: header of keys, then values. Fields
/// containing commas are quoted.
pub fn comparison_csv(report: &ComparisonReport) -> String {
    let kv = report.key_values();
    let quote = |s: &str| {
        if s.contains(',') || s.contains('"') {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    let header: Vec<String> = kv.iter().map(|(k, _)| quote(k)).collect();
    let row: Vec<String> = kv.iter().map(|(_, v)| quote(v)).collect();
    format!("{}\n{}\n", header.join(","), row.join(","))
}
