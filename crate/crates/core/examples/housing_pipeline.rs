//! CSV to private coefficients: log-transform, quantile clamping, rescaling
//! to [-1,1], then ℓ1 and ℓ∞ sanitization of the regression statistic.
//!
//! Pass a CSV path and a response column to use your own data; otherwise a
//! synthetic housing-like table is generated.

use std::io::Write;

use knorm::harness::{run_regression_file, SimulationConfig};
use knorm::linreg::PreprocessConfig;
use knorm::RngStream;
use rand::Rng;

fn synthetic_csv(path: &std::path::Path) -> std::io::Result<()> {
    let mut rng = RngStream::new(11, 0).rng();
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "price,sqft,bedrooms,age,garage")?;
    for _ in 0..5_000 {
        let sqft: f64 = rng.random_range(600.0..4000.0);
        let bedrooms = (sqft / 700.0).round().max(1.0);
        let age: f64 = rng.random_range(0.0..80.0);
        let garage = if rng.random::<f64>() < 0.6 { 1.0 } else { 0.0 };
        let noise: f64 = rng.random_range(-0.3..0.3);
        let price = (11.0 + 0.8 * sqft.ln() - 0.004 * age + 0.1 * garage + noise).exp();
        writeln!(f, "{price:.0},{sqft:.0},{bedrooms},{age:.1},{garage}")?;
    }
    Ok(())
}

fn main() -> knorm::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = std::env::temp_dir();
    let (path, pre) = match args.as_slice() {
        [path, response, rest @ ..] => (
            std::path::PathBuf::from(path),
            PreprocessConfig::new(response.clone()).with_log_columns(rest.iter().cloned()),
        ),
        _ => {
            let path = dir.join("knorm_housing_example.csv");
            synthetic_csv(&path)?;
            (
                path,
                PreprocessConfig::new("price").with_log_columns(["price", "sqft"]),
            )
        }
    };
    let cfg = SimulationConfig {
        replicates: 200,
        epsilons: vec![0.0625, 0.25, 1.0],
        mechanisms: vec!["l1".into(), "linf".into()],
        ..SimulationConfig::regression_file()
    };
    let table = run_regression_file(&cfg, &path, &pre)?;
    println!("MLE: {}", table.echo_value("mle").unwrap_or("?"));
    println!(
        "zero-vector baseline: {}",
        table.echo_value("baseline_zero_l2_to_mle").unwrap_or("?")
    );
    for eps in &cfg.epsilons {
        let l1 = table
            .summary_value(*eps, "l1", "l2_to_mle")
            .unwrap_or(f64::NAN);
        let linf = table
            .summary_value(*eps, "linf", "l2_to_mle")
            .unwrap_or(f64::NAN);
        println!("eps={eps:<7} median distance to MLE: l1 {l1:.4}  linf {linf:.4}");
    }
    Ok(())
}
