//! Private linear regression from sanitized sufficient statistics: how often
//! the private slopes land inside the non-private 95% intervals.

use knorm::harness::{simulate_coverage, SimulationConfig};

fn main() -> knorm::Result<()> {
    let cfg = SimulationConfig {
        replicates: 50,
        epsilons: vec![0.25, 0.5, 1.0, 2.0],
        ..SimulationConfig::coverage()
    };
    let table = simulate_coverage(&cfg)?;
    println!(
        "non-private coverage of the true slopes: {:.3}",
        table
            .summary_value(f64::INFINITY, "mle", "coverage")
            .unwrap_or(f64::NAN)
    );
    println!("{:>6} {:>8} {:>8} {:>8}", "eps", "l1", "linf", "kt");
    for eps in &cfg.epsilons {
        let get = |m: &str| table.summary_value(*eps, m, "coverage").unwrap_or(f64::NAN);
        println!(
            "{eps:>6} {:>8.3} {:>8.3} {:>8.3}",
            get("l1"),
            get("linf"),
            get("kt")
        );
    }
    Ok(())
}
